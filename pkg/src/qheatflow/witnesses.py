"""Heat-flow inequalities that witness quasiprobability negativity.

Every witness returns a WitnessVerdict.  A verdict only reports
``violated`` when all of its preconditions hold, so sweeps can record
precondition failures as distinct cells rather than errors.  Inequalities
are non-strict: values on the boundary (within 1e-12) count as satisfied.

Identifiers: T1 (resonant two-qubit), T2 (nonideal two-qubit), T3 /
T3-nonideal (exchange-fluctuation bound, any dimension), I4 (alternative
correlation bound), T4-lower / T4-upper (TPM band, projective data only),
strong-backflow (entanglement threshold log(d) / dBeta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fluctuations import DivergenceError, TransitionTable, XftReport, table_heat

VIOLATION_MARGIN = 1e-12
ENERGY_PRESERVING_TOL = 1e-10


@dataclass(frozen=True)
class WitnessVerdict:
    inequality_id: str
    bound: float
    observed: float
    violated: bool
    preconditions_ok: bool
    preconditions: tuple[tuple[str, bool], ...] = ()
    extras: tuple[tuple[str, float], ...] = ()

    def precondition(self, name: str) -> bool:
        for key, ok in self.preconditions:
            if key == name:
                return ok
        raise KeyError(name)

    def extra(self, name: str) -> float:
        for key, val in self.extras:
            if key == name:
                return val
        raise KeyError(name)


def _resolve(
    inequality_id: str,
    bound: float,
    observed: float,
    preconditions: list[tuple[str, bool]],
    exceeds: bool,
    extras: tuple[tuple[str, float], ...] = (),
) -> WitnessVerdict:
    ok = all(flag for _, flag in preconditions)
    return WitnessVerdict(
        inequality_id=inequality_id,
        bound=bound,
        observed=observed,
        violated=bool(ok and exceeds),
        preconditions_ok=ok,
        preconditions=tuple(preconditions),
        extras=extras,
    )


def two_qubit_flow_witness(
    q: float,
    q_tpm: float,
    beta_c: float,
    beta_h: float,
    gap: float = 1.0,
    commutator_norm: float | None = None,
) -> WitnessVerdict:
    """|Q| <= (2 + e^{bH E} + e^{bC E}) / (e^{bC E} - e^{bH E}) * |Q_TPM|.

    Holds whenever the MH table is nonnegative, for resonant qubits under
    a work-free unitary; a violation therefore certifies negativity (and
    implies |Q| > |Q_TPM| since the prefactor exceeds one).
    """
    if beta_c == beta_h:
        raise ValueError("bound undefined for equal inverse temperatures")
    a = np.exp(beta_h * gap)
    b = np.exp(beta_c * gap)
    pre = [("beta_order", beta_c > beta_h)]
    if commutator_norm is not None:
        pre.append(("energy_preserving", commutator_norm < ENERGY_PRESERVING_TOL))
    bound = (2.0 + a + b) / (b - a) * abs(q_tpm) if beta_c > beta_h else np.inf
    observed = abs(q)
    return _resolve("T1", float(bound), observed, pre, observed > bound + VIOLATION_MARGIN)


def nonideal_flow_witness(
    q: float,
    q_tpm: float,
    beta_c: float,
    beta_h: float,
    e_c: float,
    e_h: float,
    epsilon: float,
) -> WitnessVerdict:
    """Two-qubit witness tolerant to detuning and injected work.

    With R = (1+e^{bH EH})/(1+e^{bC EC}), Ebar = (EC+EH)/2 and
    Delta = |EC-EH|/(2 Ebar), nonnegativity of the MH table implies

      |Q| <= [(1+R+D(1+R)) |Q_TPM| + 4 Ebar eps (2+D(1+R))] / (1-R-D(1+R))

    plus two stronger one-sided variants (reported in extras: the lower
    admissible Q for a direct flow, the upper admissible Q for a
    backflow).  ``bound`` is the tightest bound applicable to the
    observed flow direction; at eps = Delta = 0 everything reduces to the
    resonant witness.  Preconditions: the detuning is below the critical
    value (the denominator stays positive) and the flow is large enough
    to be distinguishable from injected work, |Q| > 2 eps Ebar.
    """
    if beta_c == beta_h:
        raise ValueError("bound undefined for equal inverse temperatures")
    ebar = 0.5 * (e_c + e_h)
    delta = abs(e_c - e_h) / (2.0 * ebar)
    r = (1.0 + np.exp(beta_h * e_h)) / (1.0 + np.exp(beta_c * e_c))
    den = 1.0 - r - delta * (1.0 + r)
    pre = [
        ("beta_order", beta_c > beta_h),
        ("gap_subcritical", den > 0),
        ("flow_above_work", epsilon == 0.0 or abs(q) > 2.0 * epsilon * ebar),
    ]
    if den <= 0:
        return _resolve("T2", np.inf, abs(q), pre, False)
    slack = delta * (1.0 + r)
    sym_bound = ((1.0 + r + slack) * abs(q_tpm) + 4.0 * ebar * epsilon * (2.0 + slack)) / den
    direct_floor = ((1.0 + r - slack) * q_tpm - 4.0 * ebar * epsilon * (2.0 + slack)) / den
    back_ceiling = (
        -(1.0 + r + slack) * q_tpm + 4.0 * ebar * epsilon * (2.0 - r + slack)
    ) / den
    bound = sym_bound
    if q < 0:
        bound = min(sym_bound, -direct_floor)
    elif q > 0:
        bound = min(sym_bound, back_ceiling)
    observed = abs(q)
    return _resolve(
        "T2",
        float(bound),
        observed,
        pre,
        observed > bound + VIOLATION_MARGIN,
        extras=(
            ("symmetric_bound", float(sym_bound)),
            ("direct_floor", float(direct_floor)),
            ("back_ceiling", float(back_ceiling)),
            ("delta", float(delta)),
            ("ratio_r", float(r)),
        ),
    )


def xft_flow_witness(
    q: float,
    xft: XftReport,
    beta_c: float,
    beta_h: float,
    epsilon_work: float | None = None,
) -> WitnessVerdict:
    """Q <= [-<dI> + log(1 + chi_bar)] / dBeta, any finite dimension.

    Follows from Jensen's inequality applied to the exchange-fluctuation
    average, so it is sound whenever the MH table is nonnegative and the
    dynamics conserves energy on every contributing entry.  With
    ``epsilon_work`` set, per-entry energy mismatch up to that amount is
    tolerated and the bound gains a slack term beta_H * eps / dBeta.
    Raises DivergenceError when 1 + chi_bar <= 0 (the log is reported,
    never clamped).
    """
    if xft.chi_bar is None:
        raise ValueError("attach chi_bar to the XftReport first")
    delta_beta = beta_c - beta_h
    if delta_beta == 0:
        raise ValueError("bound undefined for equal inverse temperatures")
    if 1.0 + xft.chi_bar <= 0.0:
        raise DivergenceError(f"1 + chi_bar = {1.0 + xft.chi_bar:.3e} <= 0")
    if epsilon_work is None:
        ident = "T3"
        resonance_ok = xft.resonance_ok
        slack = 0.0
    else:
        ident = "T3-nonideal"
        resonance_ok = xft.max_energy_mismatch <= epsilon_work + 1e-15
        # Jensen with per-entry mismatch <= eps gives +beta_H eps / dBeta.
        slack = beta_h * epsilon_work / delta_beta
    pre = [
        ("beta_order", delta_beta > 0),
        ("resonance", resonance_ok),
        ("finite", bool(np.isfinite(xft.lhs) and np.isfinite(xft.avg_delta_i))),
    ]
    bound = (-xft.avg_delta_i + np.log1p(xft.chi_bar)) / delta_beta + slack
    return _resolve(ident, float(bound), q, pre, q > bound + VIOLATION_MARGIN)


def correlation_flow_witness(
    q: float, j_value: float, beta_c: float, beta_h: float
) -> WitnessVerdict:
    """Q <= log(1 + J) / dBeta with J the correlation correction."""
    delta_beta = beta_c - beta_h
    if delta_beta == 0:
        raise ValueError("bound undefined for equal inverse temperatures")
    if 1.0 + j_value <= 0.0:
        raise DivergenceError(f"1 + J = {1.0 + j_value:.3e} <= 0")
    pre = [("beta_order", delta_beta > 0)]
    bound = np.log1p(j_value) / delta_beta
    return _resolve("I4", float(bound), q, pre, q > bound + VIOLATION_MARGIN)


def tpm_band_witness(
    q: float, tpm_table: TransitionTable
) -> tuple[WitnessVerdict, WitnessVerdict]:
    """Q must stay in [Q_TPM - 2 lambda-, Q_TPM + 2 lambda+].

    lambda- (lambda+) is the TPM-weighted energy leaving (entering) C.
    Everything on the right-hand side is measurable with projective
    energy statistics alone, and no local thermality is required; the
    spectra must have nondegenerate gaps and the dynamics must conserve
    energy (checked from the table's off-resonant weight).
    """
    if tpm_table.kind != "TPM":
        raise ValueError("band witness needs a TPM table")
    for label, arr in (("C", tpm_table.energies_c), ("H", tpm_table.energies_h)):
        gaps = sorted(abs(a - b) for i, a in enumerate(arr) for b in arr[:i])
        if any(b - a <= 1e-9 for a, b in zip(gaps, gaps[1:])):
            raise ValueError(f"degenerate Bohr spectrum on {label}")
    de = tpm_table.delta_e_c()
    mismatch = np.abs(de + tpm_table.delta_e_h())
    off_weight = float(tpm_table.values[mismatch > 1e-9].sum())
    pre = [("energy_preserving", off_weight < ENERGY_PRESERVING_TOL)]
    v = tpm_table.values
    lam_minus = float((v * de)[de > 1e-12].sum())
    lam_plus = float((v * (-de))[de < -1e-12].sum())
    q_tpm = table_heat(tpm_table)
    lower = q_tpm - 2.0 * lam_minus
    upper = q_tpm + 2.0 * lam_plus
    extras = (
        ("lambda_minus", lam_minus),
        ("lambda_plus", lam_plus),
        ("q_tpm", q_tpm),
    )
    lower_verdict = _resolve(
        "T4-lower", float(lower), q, pre, q < lower - VIOLATION_MARGIN, extras
    )
    upper_verdict = _resolve(
        "T4-upper", float(upper), q, pre, q > upper + VIOLATION_MARGIN, extras
    )
    return lower_verdict, upper_verdict


def strong_backflow_witness(
    q: float, beta_c: float, beta_h: float, d: int
) -> WitnessVerdict:
    """Backflow beyond log(d) / dBeta is impossible for separable states."""
    delta_beta = beta_c - beta_h
    pre = [("beta_order", delta_beta > 0)]
    bound = np.log(d) / delta_beta if delta_beta > 0 else np.inf
    return _resolve(
        "strong-backflow", float(bound), q, pre, q > bound + VIOLATION_MARGIN
    )
