"""Transition tables, heat functionals and exchange-fluctuation identities.

Two distributions over energy transitions (i_C, i_H) -> (f_C, f_H):

  * TPM:            p[i -> f] = rho_ii |<f|U|i>|^2   (a true probability;
                    the first projective measurement removes coherences);
  * Margenau-Hill:  p[i -> f] = Re <f|U|i><i| rho U^dag |f>   (real, sums
                    to one, entries in [-1/8, 1], reproduces the heat of
                    the undisturbed state).

Heat bookkeeping: dE_C = E(i_C) - E(f_C) per entry, and
Q = sum p * dE_C, so Q > 0 means net energy leaving C (backflow C -> H).
Only the real part of the Margenau-Hill expression is computed.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import unwrap
from .states import BipartiteSystem

MH_LOWER_BOUND = -0.125
NEGLIGIBLE_WEIGHT = 1e-12
NEGATIVE_ENTRY_TOL = 1e-14

CSV_HEADER = "i_C,i_H,f_C,f_H,value,dE_C,dE_H"


class DivergenceError(ValueError):
    """A fluctuation functional hit a vanishing population or domain edge."""


@dataclass(frozen=True)
class TransitionTable:
    """Dense table of transition weights with the local spectra attached.

    ``values`` has shape (d_C, d_H, d_C, d_H) indexed [i_C, i_H, f_C, f_H].
    """

    kind: str  # "TPM" or "MH"
    values: np.ndarray
    energies_c: tuple[float, ...]
    energies_h: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("TPM", "MH"):
            raise ValueError(f"kind must be 'TPM' or 'MH', got {self.kind!r}")
        v = np.array(self.values, dtype=float)
        d_c, d_h = len(self.energies_c), len(self.energies_h)
        if v.shape != (d_c, d_h, d_c, d_h):
            raise ValueError(f"values shape {v.shape} does not match spectra")
        total = v.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"table sums to {total}, expected 1")
        lo = v.min()
        if self.kind == "TPM" and lo < -1e-12:
            raise ValueError(f"TPM entry {lo} below 0")
        if self.kind == "MH" and lo < MH_LOWER_BOUND - 1e-10:
            raise ValueError(f"MH entry {lo} below -1/8")
        if v.max() > 1.0 + 1e-10:
            raise ValueError(f"entry {v.max()} above 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "energies_c", tuple(float(e) for e in self.energies_c))
        object.__setattr__(self, "energies_h", tuple(float(e) for e in self.energies_h))

    @property
    def dims(self) -> tuple[int, int]:
        return (len(self.energies_c), len(self.energies_h))

    def entry(self, i_c: int, i_h: int, f_c: int, f_h: int) -> float:
        return float(self.values[i_c, i_h, f_c, f_h])

    def min_entry(self) -> float:
        return float(self.values.min())

    def initial_marginal(self) -> np.ndarray:
        """Sum over final indices -> (d_C, d_H)."""
        return self.values.sum(axis=(2, 3))

    def final_marginal(self) -> np.ndarray:
        """Sum over initial indices -> (d_C, d_H)."""
        return self.values.sum(axis=(0, 1))

    def delta_e_c(self) -> np.ndarray:
        ec = np.asarray(self.energies_c)
        d_c, d_h = self.dims
        out = ec[:, None, None, None] - ec[None, None, :, None]
        return np.broadcast_to(out, (d_c, d_h, d_c, d_h))

    def delta_e_h(self) -> np.ndarray:
        eh = np.asarray(self.energies_h)
        d_c, d_h = self.dims
        out = eh[None, :, None, None] - eh[None, None, None, :]
        return np.broadcast_to(out, (d_c, d_h, d_c, d_h))

    def negative_entries(self) -> list[tuple[tuple[int, int, int, int], float]]:
        out = []
        for idx in np.argwhere(self.values < -NEGATIVE_ENTRY_TOL):
            key = tuple(int(k) for k in idx)
            out.append((key, float(self.values[key])))
        return out

    def to_csv(self, extra: dict[str, np.ndarray] | None = None) -> str:
        """CSV serialization, 17 significant digits per value."""
        header = CSV_HEADER
        extra = extra or {}
        for name in extra:
            header += f",{name}"
        buf = io.StringIO()
        buf.write(header + "\n")
        d_c, d_h = self.dims
        for i_c in range(d_c):
            for i_h in range(d_h):
                for f_c in range(d_c):
                    for f_h in range(d_h):
                        de_c = self.energies_c[i_c] - self.energies_c[f_c]
                        de_h = self.energies_h[i_h] - self.energies_h[f_h]
                        row = (
                            f"{i_c},{i_h},{f_c},{f_h},"
                            f"{self.values[i_c, i_h, f_c, f_h]:.17g},"
                            f"{de_c:.17g},{de_h:.17g}"
                        )
                        for name in extra:
                            row += f",{extra[name][i_c, i_h, f_c, f_h]:.17g}"
                        buf.write(row + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class HeatReport:
    """Net heat, its TPM counterpart, and the direct/back decomposition."""

    q: float
    q_back: float
    q_direct: float
    q_tpm: float | None = None
    negative_entries: tuple = ()


@dataclass(frozen=True)
class XftReport:
    """Exchange-fluctuation average <e^{dI + dBeta dE}> over an MH table.

    When the dynamics conserves energy entry-by-entry (resonance_ok) and
    the coherence term chi_bar is supplied, lhs = 1 + chi_bar holds to
    numerical precision.
    """

    lhs: float
    avg_delta_i: float
    resonance_ok: bool
    max_energy_mismatch: float
    chi_bar: float | None = None

    def with_chi(self, chi: float) -> "XftReport":
        return replace(self, chi_bar=chi)

    def identity_gap(self) -> float:
        if self.chi_bar is None:
            raise ValueError("chi_bar not attached")
        return abs(self.lhs - 1.0 - self.chi_bar)


def _table_values(sys: BipartiteSystem, u, dephased: bool) -> np.ndarray:
    u = unwrap(u)
    rho = np.diag(np.diag(sys.rho)) if dephased else sys.rho
    # entry [i, f] = Re[ U_{f,i} (rho U^dag)_{i,f} ]
    vals = np.real(u.T * (rho @ u.conj().T))
    d_c, d_h = sys.dims
    return vals.reshape(d_c, d_h, d_c, d_h)


def tpm_distribution(sys: BipartiteSystem, u) -> TransitionTable:
    """Two-point-measurement transition probabilities."""
    u = unwrap(u)
    if u.shape[0] != sys.d_c * sys.d_h:
        raise ValueError("unitary dimension does not match the system")
    pops = sys.populations()
    vals = (np.abs(u.T) ** 2) * pops[:, None]
    d_c, d_h = sys.dims
    return TransitionTable(
        "TPM",
        np.clip(vals, 0.0, None).reshape(d_c, d_h, d_c, d_h),
        sys.spectrum_c.levels,
        sys.spectrum_h.levels,
    )


def mh_distribution(sys: BipartiteSystem, u) -> TransitionTable:
    """Margenau-Hill quasiprobability table (real part only)."""
    u = unwrap(u)
    if u.shape[0] != sys.d_c * sys.d_h:
        raise ValueError("unitary dimension does not match the system")
    return TransitionTable(
        "MH",
        _table_values(sys, u, dephased=False),
        sys.spectrum_c.levels,
        sys.spectrum_h.levels,
    )


def marginal_check(
    table: TransitionTable,
    sys: BipartiteSystem,
    u,
    against_dephased: bool | None = None,
) -> float:
    """Max deviation of the table marginals from the state's energy statistics.

    The initial-index marginal is compared with diag(rho) and the
    final-index marginal with diag(U rho U^dag).  TPM tables compare
    against the dephased state by default (their defining property);
    pass against_dephased=False to quantify how far the TPM marginals
    sit from the undisturbed statistics.
    """
    u = unwrap(u)
    if against_dephased is None:
        against_dephased = table.kind == "TPM"
    rho = np.diag(np.diag(sys.rho)) if against_dephased else sys.rho
    d_c, d_h = sys.dims
    init = np.real(np.diag(rho)).reshape(d_c, d_h)
    final = np.real(np.diag(u @ rho @ u.conj().T)).reshape(d_c, d_h)
    dev_i = np.max(np.abs(table.initial_marginal() - init))
    dev_f = np.max(np.abs(table.final_marginal() - final))
    return float(max(dev_i, dev_f))


def average_heat(sys: BipartiteSystem, u) -> float:
    """Q = tr(rho H_C) - tr(U rho U^dag H_C); Q > 0 is backflow C -> H."""
    u = unwrap(u)
    h_c = np.kron(sys.spectrum_c.hamiltonian(), np.eye(sys.d_h))
    rho_t = u @ sys.rho @ u.conj().T
    return float(np.real(np.trace(sys.rho @ h_c) - np.trace(rho_t @ h_c)))


def table_heat(table: TransitionTable) -> float:
    """Q = sum of entry * (E_iC - E_fC)."""
    m = table.values.sum(axis=(1, 3))
    ec = np.asarray(table.energies_c)
    return float((m * (ec[:, None] - ec[None, :])).sum())


def flow_decomposition(table: TransitionTable, q_tpm: float | None = None) -> HeatReport:
    """Split the net heat into back (C -> H) and direct (H -> C) flows.

    With p+ / p- the positive / negative parts of the table, summing over
    index pairs with E_iC > E_fC:

        Q_back   = sum (p+[i->f] - p-[f->i]) * dE
        Q_direct = sum (p+[f->i] - p-[i->f]) * dE

    so a negative entry contributes to the flow *opposite* to its
    transition direction.  Q_back - Q_direct equals the table heat.
    """
    v = table.values
    pos = np.clip(v, 0.0, None)
    neg = np.clip(v, None, 0.0)
    pos_rev = pos.transpose(2, 3, 0, 1)
    neg_rev = neg.transpose(2, 3, 0, 1)
    de = table.delta_e_c()
    mask = de > 1e-12
    q_back = float(((pos - neg_rev) * de)[mask].sum())
    q_direct = float(((pos_rev - neg) * de)[mask].sum())
    return HeatReport(
        q=table_heat(table),
        q_back=q_back,
        q_direct=q_direct,
        q_tpm=q_tpm,
        negative_entries=tuple(table.negative_entries()),
    )


def heat_report(sys: BipartiteSystem, u) -> HeatReport:
    """Full heat bookkeeping for one state/protocol pair."""
    mh = mh_distribution(sys, u)
    tpm = tpm_distribution(sys, u)
    return flow_decomposition(mh, q_tpm=table_heat(tpm))


def exchange_manifold_pw(sys: BipartiteSystem, rotations) -> dict[tuple, float]:
    """Closed-form MH entries on the exchange manifolds.

    For a manifold (n, m) with n < m, indices a = n*d+m, b = m*d+n and a
    block rotation by theta with phases (phi, lam):

        p[a -> b] = rho_aa sin^2(theta) + Re(rho_ab e^{i(phi+lam)}) sin cos
        p[b -> a] = rho_bb sin^2(theta) - Re(rho_ab e^{i(phi+lam)}) sin cos

    Keys are (i_C, i_H, f_C, f_H).  Requires equal local spectra with
    nondegenerate gaps; matches the generic matrix computation exactly.
    """
    if sys.spectrum_c != sys.spectrum_h:
        raise ValueError("exchange closed forms need equal local spectra")
    if not sys.spectrum_c.bohr_nondegenerate():
        raise DivergenceError("degenerate Bohr spectrum")
    d = sys.d_c
    pops = sys.populations()
    out: dict[tuple, float] = {}
    for rot in rotations:
        n, m = rot.level_pair
        a, b = n * d + m, m * d + n
        st, ct = np.sin(rot.theta), np.cos(rot.theta)
        coh = float(np.real(sys.rho[a, b] * np.exp(1j * (rot.phi + rot.lam)))) * st * ct
        out[(n, m, m, n)] = pops[a] * st**2 + coh
        out[(m, n, n, m)] = pops[b] * st**2 - coh
    return out


def exchange_heat_shift(sys: BipartiteSystem, rotations) -> float:
    """Closed-form Q - Q_TPM for manifold protocols.

    Sum over manifolds n < m of -Re(rho_ab e^{i(phi+lam)}) sin(2 theta)
    times the gap E_m - E_n; the coherence is the only source of the
    shift, so it vanishes on dephased states.
    """
    if sys.spectrum_c != sys.spectrum_h:
        raise ValueError("exchange closed forms need equal local spectra")
    d = sys.d_c
    levels = sys.spectrum_c.levels
    total = 0.0
    for rot in rotations:
        n, m = rot.level_pair
        a, b = n * d + m, m * d + n
        coh = float(np.real(sys.rho[a, b] * np.exp(1j * (rot.phi + rot.lam))))
        total -= coh * np.sin(2.0 * rot.theta) * (levels[m] - levels[n])
    return total


def exchange_manifold_tpm(sys: BipartiteSystem, rotations) -> dict[tuple, float]:
    """Closed-form TPM entries on the exchange manifolds."""
    if sys.spectrum_c != sys.spectrum_h:
        raise ValueError("exchange closed forms need equal local spectra")
    d = sys.d_c
    pops = sys.populations()
    out: dict[tuple, float] = {}
    for rot in rotations:
        n, m = rot.level_pair
        a, b = n * d + m, m * d + n
        s2 = np.sin(rot.theta) ** 2
        out[(n, m, m, n)] = pops[a] * s2
        out[(m, n, n, m)] = pops[b] * s2
    return out


def two_qubit_exchange_probs(
    theta: float,
    eta: float,
    xi: float,
    beta_c: float,
    beta_h: float,
    p00: float,
    gap: float = 1.0,
    phi: float = 0.0,
    lam: float = 0.0,
) -> dict[str, float]:
    """Closed-form two-qubit exchange entries.

    Returns the four interesting entries keyed 'tpm_01_10', 'tpm_10_01',
    'mh_01_10', 'mh_10_01' (initial -> final in C-major labels).
    """
    z_c = 1.0 + np.exp(-beta_c * gap)
    z_h = 1.0 + np.exp(-beta_h * gap)
    s2 = np.sin(theta) ** 2
    coh = eta * np.cos(xi + phi + lam) * np.sin(theta) * np.cos(theta)
    tpm_01 = (1.0 / z_c - p00) * s2
    tpm_10 = (1.0 / z_h - p00) * s2
    return {
        "tpm_01_10": tpm_01,
        "tpm_10_01": tpm_10,
        "mh_01_10": tpm_01 + coh,
        "mh_10_01": tpm_10 - coh,
    }


def two_qubit_heat(
    theta: float,
    eta: float,
    xi: float,
    beta_c: float,
    beta_h: float,
    gap: float = 1.0,
    phi: float = 0.0,
    lam: float = 0.0,
) -> float:
    """Closed-form net heat for the resonant two-qubit exchange.

    Q = -eta cos(xi+phi+lam) sin(2 theta) E
        + sin^2(theta) E (1/(1+e^{beta_C E}) - 1/(1+e^{beta_H E})).
    Independent of P00.
    """
    coherent = -eta * np.cos(xi + phi + lam) * np.sin(2.0 * theta) * gap
    return float(coherent + two_qubit_tpm_heat(theta, beta_c, beta_h, gap))


def two_qubit_tpm_heat(
    theta: float, beta_c: float, beta_h: float, gap: float = 1.0
) -> float:
    """Closed-form TPM heat; never positive when beta_C > beta_H."""
    diff = 1.0 / (1.0 + np.exp(beta_c * gap)) - 1.0 / (1.0 + np.exp(beta_h * gap))
    return float(np.sin(theta) ** 2 * gap * diff)


def xft_coherence_term(sys: BipartiteSystem, u) -> float:
    """Coherence correction chi_bar to the exchange-fluctuation average.

    chi_bar = sum over l and pairs k != m of
              (rho_ll / rho_kk) Re{ rho_km <l|U|k> <m|U^dag|l> }.

    Diverges when a population rho_kk vanishes while its coherence row
    still carries weight; that case raises DivergenceError.
    """
    u = unwrap(u)
    pops = sys.populations()
    w = u.conj().T @ (pops[:, None] * u)  # (U^dag diag(pops) U)
    num = np.asarray(sys.rho * w.T)  # term[k, m] = rho_km * w[m, k]
    np.fill_diagonal(num, 0.0)
    needed = np.abs(num) > 1e-15
    starved = needed & (pops[:, None] <= NEGLIGIBLE_WEIGHT)
    if starved.any():
        k = int(np.argwhere(starved)[0][0])
        raise DivergenceError(
            f"population rho_{k}{k} = {pops[k]:.3e} divides a nonzero coherence term"
        )
    safe = np.where(pops > NEGLIGIBLE_WEIGHT, pops, 1.0)
    return float(np.real(num / safe[:, None]).sum())


def _log_or_raise(values: np.ndarray, label: str, needed: np.ndarray) -> np.ndarray:
    bad = needed & (values <= 0.0)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise DivergenceError(f"{label}{tuple(int(i) for i in idx)} vanishes inside a log")
    return np.log(np.where(values > 0.0, values, 1.0))


def xft_average(table: TransitionTable, sys: BipartiteSystem) -> XftReport:
    """<e^{dI + dBeta dE_C}> over an MH table, plus <dI>.

    dI uses the correlation elements I = log(rho_ii / (p_C p_H)) of the
    initial state.  Entries with |p| <= 1e-12 are skipped (0 log 0
    convention); a vanishing population or marginal that is actually
    needed raises DivergenceError instead of being clamped.  The report
    flags whether every contributing entry conserves energy (the regime
    in which the identity lhs = 1 + chi_bar applies).
    """
    if table.kind != "MH":
        raise ValueError("the exchange-fluctuation average is defined on MH tables")
    if sys.beta_c is None or sys.beta_h is None:
        raise ValueError("system must carry its inverse temperatures")
    d_c, d_h = sys.dims
    p = table.values
    mask = np.abs(p) > NEGLIGIBLE_WEIGHT

    pops = sys.populations().reshape(d_c, d_h)
    pc = np.real(np.diag(sys.marginal_c()))
    ph = np.real(np.diag(sys.marginal_h()))
    needed_joint = mask.any(axis=(2, 3)) | mask.any(axis=(0, 1))
    log_pop = _log_or_raise(pops, "population", needed_joint)
    log_pc = _log_or_raise(pc, "marginal_C", needed_joint.any(axis=1))
    log_ph = _log_or_raise(ph, "marginal_H", needed_joint.any(axis=0))
    info = log_pop - log_pc[:, None] - log_ph[None, :]  # I at each (c, h)

    delta_i = (
        info[None, None, :, :] - info[:, :, None, None]
    )  # [i_C, i_H, f_C, f_H] = I_f - I_i
    de_c = table.delta_e_c()
    de_h = table.delta_e_h()
    mismatch = np.abs(de_c + de_h)
    energy_scale = max(
        1.0, max(abs(e) for e in table.energies_c + table.energies_h)
    )
    max_mismatch = float(mismatch[mask].max()) if mask.any() else 0.0
    resonance_ok = max_mismatch <= 1e-9 * energy_scale

    delta_beta = sys.beta_c - sys.beta_h
    weight = np.exp(np.where(mask, delta_i + delta_beta * de_c, 0.0))
    lhs = float((p * weight)[mask].sum())
    avg_di = float((p * np.where(mask, delta_i, 0.0))[mask].sum())
    return XftReport(
        lhs=lhs,
        avg_delta_i=avg_di,
        resonance_ok=resonance_ok,
        max_energy_mismatch=max_mismatch,
    )


@dataclass(frozen=True)
class HeatExpCorrection:
    """Correction J with <e^{dBeta dE_C}>_MH = 1 + J, plus its norm bound.

    J splits into a population part (zero when the joint populations are
    the product of the marginals) and a coherence part (zero for states
    diagonal in the energy basis).
    """

    j: float
    population_norm: float
    coherence_norm: float

    @property
    def norm_bound(self) -> float:
        return self.population_norm + self.coherence_norm


def heat_exp_correction(sys: BipartiteSystem, u) -> HeatExpCorrection:
    """J = Re tr{ U^dag (rho_C x rho_H) U (c + q) } for energy-preserving U."""
    u = unwrap(u)
    pops = np.real(np.diag(sys.rho))
    pc = np.real(np.diag(sys.marginal_c()))
    ph = np.real(np.diag(sys.marginal_h()))
    qpop = np.kron(pc, ph)
    if qpop.min() <= NEGLIGIBLE_WEIGHT:
        raise DivergenceError("a product-marginal population vanishes")
    c_mat = np.diag((pops / qpop - 1.0).astype(complex))
    q_mat = np.asarray(sys.rho / qpop[:, None])
    np.fill_diagonal(q_mat, 0.0)
    evolved_product = u.conj().T @ (qpop[:, None] * u)
    j = float(np.real(np.trace(evolved_product @ (c_mat + q_mat))))
    return HeatExpCorrection(
        j=j,
        population_norm=float(np.linalg.norm(c_mat, 2)),
        coherence_norm=float(np.linalg.norm(q_mat, 2)),
    )


def max_heat_coherence_shift(sys: BipartiteSystem) -> float:
    """Largest |Q - Q_TPM| reachable by energy-preserving protocols.

    Equals sum over manifolds of |coherence| * gap; attained at
    quarter rotations with the phases tuned so cos(xi+phi+lam) = +-1.
    """
    if sys.spectrum_c != sys.spectrum_h:
        raise ValueError("defined for equal local spectra")
    d = sys.d_c
    levels = sys.spectrum_c.levels
    total = 0.0
    for m in range(d):
        for n in range(m + 1, d):  # n > m so E_n > E_m
            a, b = n * d + m, m * d + n
            total += abs(sys.rho[a, b]) * (levels[n] - levels[m])
    return float(total)
