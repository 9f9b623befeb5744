"""Qubit-probe weak-measurement scheme for the Margenau-Hill table.

One row of the table at a time: couple the system projector
Pi = |i_C i_H><i_C i_H| to a qubit ancilla prepared in
cos(eps)|0> - sin(eps)|1> through V = Pi_perp x I + Pi x sigma_z, run the
dynamics, then measure the ancilla in the |+->/|-> basis and the system
in the energy basis.  Together with a second, probe-free run the signed
outcome difference reconstructs the quasiprobability exactly at any
finite coupling:

    p_W[f] = (q_plus[f] - q_minus[f]) / (2 sin 2eps) + p_free[f] / 2.

Sampling uses a counter-based generator (Philox), so outcome k of a run
depends only on (seed, k) and results are reproducible under any
evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import unwrap
from .linalg import SIGMA_Z, kron
from .states import BipartiteSystem

_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class ProbeOutcomeStats:
    """Exact outcome probabilities of the probe and probe-free runs."""

    target: tuple[int, int]
    eps: float
    q_plus: np.ndarray  # (d_C, d_H), joint prob of ancilla + and final f
    q_minus: np.ndarray
    p_undisturbed: np.ndarray  # (d_C, d_H), probe-free final distribution
    energies_c: tuple[float, ...]
    energies_h: tuple[float, ...]

    def __post_init__(self):
        for name in ("q_plus", "q_minus", "p_undisturbed"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12:
                raise ValueError(f"{name} entries outside [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if abs(self.q_plus.sum() + self.q_minus.sum() - 1.0) > 1e-10:
            raise ValueError("probe-run probabilities do not sum to 1")
        if abs(self.p_undisturbed.sum() - 1.0) > 1e-10:
            raise ValueError("probe-free probabilities do not sum to 1")


def probe_statistics(
    sys: BipartiteSystem, u, target: tuple[int, int], eps: float
) -> ProbeOutcomeStats:
    """Exact joint outcome statistics from the full system+ancilla evolution."""
    if not 0.0 < eps < 0.5 * np.pi:
        raise ValueError("coupling angle must lie strictly between 0 and pi/2")
    u = unwrap(u)
    d_c, d_h = sys.dims
    dim = d_c * d_h
    i_c, i_h = target
    if not (0 <= i_c < d_c and 0 <= i_h < d_h):
        raise ValueError(f"target {target} out of range for dims {sys.dims}")
    idx = i_c * d_h + i_h

    pi_op = np.zeros((dim, dim), dtype=complex)
    pi_op[idx, idx] = 1.0
    pi_perp = np.eye(dim, dtype=complex) - pi_op
    v = kron(pi_perp, np.eye(2)) + kron(pi_op, SIGMA_Z)

    ancilla = np.array([np.cos(eps), -np.sin(eps)], dtype=complex)
    joint = kron(sys.rho, np.outer(ancilla, ancilla.conj()))
    u_joint = kron(u, np.eye(2))
    evolved = u_joint @ v @ joint @ v.conj().T @ u_joint.conj().T

    blocks = evolved.reshape(dim, 2, dim, 2)
    q_plus = np.empty(dim)
    q_minus = np.empty(dim)
    for f in range(dim):
        block = blocks[f, :, f, :]
        q_plus[f] = np.real(_PLUS.conj() @ block @ _PLUS)
        q_minus[f] = np.real(_MINUS.conj() @ block @ _MINUS)

    p_free = np.real(np.diag(u @ sys.rho @ u.conj().T))
    return ProbeOutcomeStats(
        target=(i_c, i_h),
        eps=float(eps),
        q_plus=q_plus.reshape(d_c, d_h),
        q_minus=q_minus.reshape(d_c, d_h),
        p_undisturbed=p_free.reshape(d_c, d_h),
        energies_c=sys.spectrum_c.levels,
        energies_h=sys.spectrum_h.levels,
    )


def probe_effects(eps: float, dim: int, idx: int) -> tuple[np.ndarray, np.ndarray]:
    """POVM elements of the ancilla outcomes on the system.

    E_pm = (1 -+ sin 2eps) I/2 +- sin 2eps Pi; they sum to the identity.
    """
    s = np.sin(2.0 * eps)
    pi_op = np.zeros((dim, dim), dtype=complex)
    pi_op[idx, idx] = 1.0
    eye = np.eye(dim, dtype=complex)
    e_plus = (1.0 - s) * eye / 2.0 + s * pi_op
    e_minus = (1.0 + s) * eye / 2.0 - s * pi_op
    return e_plus, e_minus


def reconstruct_quasiprobability(stats: ProbeOutcomeStats) -> np.ndarray:
    """Exact reconstruction of the targeted MH row, any admissible eps."""
    s2 = np.sin(2.0 * stats.eps)
    if s2 <= 1e-9:
        raise ValueError("sin(2 eps) too small; reconstruction ill-conditioned")
    return (stats.q_plus - stats.q_minus) / (2.0 * s2) + stats.p_undisturbed / 2.0


def _counts(probs: np.ndarray, n_shots: int, bit_gen) -> np.ndarray:
    """Inverse-CDF multinomial draw; outcome k depends only on uniform k."""
    rng = np.random.Generator(bit_gen)
    edges = np.cumsum(probs)
    edges[-1] = 1.0  # guard against rounding at the top
    draws = np.searchsorted(edges, rng.random(n_shots), side="right")
    return np.bincount(draws, minlength=probs.size)


@dataclass(frozen=True)
class SampledReconstruction:
    """Finite-statistics reconstruction with per-entry standard errors."""

    values: np.ndarray  # (d_C, d_H)
    stderr: np.ndarray
    n_shots: int
    seed: int
    f_plus: np.ndarray | None = None  # empirical outcome frequencies
    f_minus: np.ndarray | None = None
    f_free: np.ndarray | None = None


def sampled_reconstruction(
    stats: ProbeOutcomeStats, n_shots: int, seed: int
) -> SampledReconstruction:
    """Reconstruct from multinomial samples of both runs.

    The probe run samples the 2*d outcomes (ancilla sign, final state);
    the probe-free run samples the d final states.  Standard errors
    combine the multinomial variances of both runs and shrink as
    n_shots^(-1/2).
    """
    if n_shots < 1:
        raise ValueError("n_shots must be at least 1")
    shape = stats.q_plus.shape
    dim = stats.q_plus.size
    probe_probs = np.concatenate([stats.q_plus.ravel(), stats.q_minus.ravel()])
    children = np.random.SeedSequence(seed).spawn(2)
    probe_counts = _counts(probe_probs, n_shots, np.random.Philox(children[0]))
    free_counts = _counts(stats.p_undisturbed.ravel(), n_shots, np.random.Philox(children[1]))

    f_plus = probe_counts[:dim] / n_shots
    f_minus = probe_counts[dim:] / n_shots
    f_free = free_counts / n_shots
    s2 = np.sin(2.0 * stats.eps)
    if s2 <= 1e-9:
        raise ValueError("sin(2 eps) too small; reconstruction ill-conditioned")
    values = (f_plus - f_minus) / (2.0 * s2) + f_free / 2.0

    var_delta = (f_plus + f_minus - (f_plus - f_minus) ** 2) / n_shots
    var_free = f_free * (1.0 - f_free) / n_shots
    stderr = np.sqrt(var_delta / (4.0 * s2**2) + var_free / 4.0)
    return SampledReconstruction(
        values=values.reshape(shape),
        stderr=stderr.reshape(shape),
        n_shots=int(n_shots),
        seed=int(seed),
        f_plus=f_plus.reshape(shape),
        f_minus=f_minus.reshape(shape),
        f_free=f_free.reshape(shape),
    )
