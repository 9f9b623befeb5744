"""Energy-preserving exchange unitaries and near-preserving perturbations.

With equal local spectra and nondegenerate gaps, a work-free unitary can
only rotate within the exchange manifolds {|n m>, |m n>}.  Each manifold
block (indices a = n*d+m, b = m*d+n, n < m) takes the form

    [ e^{i(kappa+lam)} cos(theta)   -e^{i(kappa-phi)} sin(theta) ]
    [ e^{i(kappa+phi)} sin(theta)    e^{i(kappa-lam)} cos(theta) ]

The transition tables depend on the phases only through cos(xi+phi+lam),
so the phase-free rotation (kappa = lam = phi = 0) is the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SIGMA_X, SIGMA_Y, kron, matrix_exp, spectral_norm
from .states import EnergySpectrum

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class ManifoldRotation:
    """Rotation angle and phases for one exchange manifold (n, m), n < m."""

    level_pair: tuple[int, int]
    theta: float
    phi: float = 0.0
    lam: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        n, m = self.level_pair
        if n == m:
            raise ValueError("manifold levels must differ")
        if n > m:
            object.__setattr__(self, "level_pair", (m, n))


@dataclass(frozen=True)
class UnitaryReport:
    """A constructed unitary plus how well it conserves energy.

    ``commutator_norm`` is ||[U, H_C + H_H]|| for the Hamiltonian the
    constructor was given; ``epsilon`` is ||U - U_ref|| against an ideal
    reference when one exists.
    """

    matrix: np.ndarray
    commutator_norm: float
    epsilon: float | None = None

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        defect = spectral_norm(u @ u.conj().T - np.eye(u.shape[0]))
        if defect > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)


def unwrap(u) -> np.ndarray:
    """Accept either a UnitaryReport or a bare matrix."""
    return u.matrix if isinstance(u, UnitaryReport) else np.asarray(u, dtype=complex)


def commutator_norm(u, h_total: np.ndarray) -> float:
    """|| U H - H U ||."""
    u = unwrap(u)
    return spectral_norm(u @ h_total - h_total @ u)


def _total_hamiltonian(spectrum: EnergySpectrum) -> np.ndarray:
    h = spectrum.hamiltonian()
    eye = np.eye(spectrum.dim)
    return kron(h, eye) + kron(eye, h)


def energy_preserving_unitary(
    spectrum: EnergySpectrum, rotations: list[ManifoldRotation] | tuple = ()
) -> UnitaryReport:
    """Identity outside the listed manifolds, rotation blocks inside.

    Requires a nondegenerate Bohr spectrum (equal local Hamiltonians) and
    at most one rotation per manifold.
    """
    if not spectrum.bohr_nondegenerate():
        raise ValueError("spectrum has degenerate gaps; manifolds are not independent")
    d = spectrum.dim
    u = np.eye(d * d, dtype=complex)
    seen: set[tuple[int, int]] = set()
    for rot in rotations:
        n, m = rot.level_pair
        if not 0 <= n < m < d:
            raise ValueError(f"manifold {rot.level_pair} invalid for dimension {d}")
        if (n, m) in seen:
            raise ValueError(f"duplicate rotation for manifold ({n}, {m})")
        seen.add((n, m))
        a, b = n * d + m, m * d + n
        ct, st = np.cos(rot.theta), np.sin(rot.theta)
        u[a, a] = np.exp(1j * (rot.kappa + rot.lam)) * ct
        u[a, b] = -np.exp(1j * (rot.kappa - rot.phi)) * st
        u[b, a] = np.exp(1j * (rot.kappa + rot.phi)) * st
        u[b, b] = np.exp(1j * (rot.kappa - rot.lam)) * ct
    cnorm = commutator_norm(u, _total_hamiltonian(spectrum))
    return UnitaryReport(u, cnorm)


def two_qubit_exchange_unitary(
    theta: float,
    kappa: float = 0.0,
    lam: float = 0.0,
    phi: float = 0.0,
    gap: float = 1.0,
) -> UnitaryReport:
    """4x4 exchange unitary rotating the |01>/|10> manifold by theta."""
    spec = EnergySpectrum.two_level(gap)
    rot = ManifoldRotation((0, 1), theta, phi=phi, lam=lam, kappa=kappa)
    return energy_preserving_unitary(spec, [rot])


def _xy_hamiltonian(j_hz: float) -> np.ndarray:
    # (pi J / 2) * (sigma_y^C sigma_x^H - sigma_x^C sigma_y^H); acts only
    # on the |01>/|10> manifold, so it commutes with any resonant pair.
    return 0.5 * np.pi * j_hz * (kron(SIGMA_Y, SIGMA_X) - kron(SIGMA_X, SIGMA_Y))


def xy_exchange_unitary(j_hz: float, t: float, gap: float = 1.0) -> UnitaryReport:
    """exp(-i H_int t) for the XY-type spin coupling of strength J (Hz).

    The block rotation angle grows linearly in time; tests read it off
    the matrix rather than assuming the slope.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    u = matrix_exp(-1j * _xy_hamiltonian(j_hz) * t)
    cnorm = commutator_norm(u, _total_hamiltonian(EnergySpectrum.two_level(gap)))
    return UnitaryReport(u, cnorm)


def perturbed_xy_unitary(
    j_hz: float, j_x: float, t: float, gap: float = 1.0
) -> UnitaryReport:
    """XY coupling plus a J_x sigma_x sigma_x term that injects work.

    epsilon is the spectral-norm distance to the unperturbed member of
    the same family (the J_x = 0 unitary), which is the explicit
    energy-preserving reference used by the nonideal witness.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    h = _xy_hamiltonian(j_hz) + j_x * kron(SIGMA_X, SIGMA_X)
    u = matrix_exp(-1j * h * t)
    u_ref = matrix_exp(-1j * _xy_hamiltonian(j_hz) * t)
    eps = spectral_norm(u - u_ref)
    cnorm = commutator_norm(u, _total_hamiltonian(EnergySpectrum.two_level(gap)))
    return UnitaryReport(u, cnorm, epsilon=eps)


def rotation_angle(u) -> float:
    """Extract the |01>/|10> rotation angle from a two-qubit exchange unitary."""
    u = unwrap(u)
    return float(np.arctan2(np.real(u[2, 1]), np.real(u[1, 1])))
