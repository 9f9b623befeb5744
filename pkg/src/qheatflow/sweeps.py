"""Parameter sweeps, single-point analysis and CSV emission.

A sweep is a scenario name, fixed parameters, one or two axes and a list
of output columns.  Every grid cell is evaluated independently and is
never dropped: cells whose state construction fails carry a status code
``infeasible:<constraint>``; witness columns use the encoding

    1  violated        0  not violated
   -1  a precondition failed        -2  evaluation error (divergence)

Scenarios:
  experiment-time    resonant qubit pair with a gamma coherence driven by
                     the XY coupling; axis ``t`` (seconds).
  qubit-theta-eta    two-qubit family at fixed P00; axes ``theta``, ``eta``.
  qutrit-theta-grid  two-qutrit family; axes ``theta01``, ``theta02``
                     (theta12 follows theta02 unless set explicitly).
  nonideal-eps-delta detuned qubits plus a work-injecting perturbation;
                     axes ``eps`` (unitary distance) and ``Delta``
                     (relative detuning).
  custom             state.kind / unitary.kind chosen by keys; axis names
                     are full config keys.
"""

from __future__ import annotations

import datetime
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ConfigError, format_config
from .dynamics import (
    ManifoldRotation,
    energy_preserving_unitary,
    perturbed_xy_unitary,
    rotation_angle,
    two_qubit_exchange_unitary,
    xy_exchange_unitary,
)
from .fluctuations import (
    DivergenceError,
    flow_decomposition,
    heat_exp_correction,
    mh_distribution,
    table_heat,
    tpm_distribution,
    xft_average,
    xft_coherence_term,
)
from .probe import probe_statistics, reconstruct_quasiprobability, sampled_reconstruction
from .states import (
    BipartiteSystem,
    InfeasibleStateError,
    QutritStateParams,
    TwoQubitParams,
    gamma_correlated_state,
    min_partial_transpose_eigenvalue,
    two_qubit_state,
    two_qutrit_state,
)
from .witnesses import (
    correlation_flow_witness,
    nonideal_flow_witness,
    strong_backflow_witness,
    tpm_band_witness,
    two_qubit_flow_witness,
    xft_flow_witness,
)

NEGATIVITY_THRESHOLD = -1e-12

SCENARIO_DEFAULTS: dict[str, dict] = {
    "experiment-time": {
        "state.beta_C": 1.13,
        "state.beta_H": 0.9618,
        "state.gamma": -0.19,
        "state.E": 1.0,
        "unitary.J": 215.1,
        "unitary.t": 0.0,
    },
    "qubit-theta-eta": {
        "state.beta_C": 1.13,
        "state.beta_H": 0.962,
        "state.P00": 0.547,
        "state.eta": 0.0,
        "state.xi": 0.0,
        "state.E": 1.0,
        "unitary.theta": 0.0,
    },
    "qutrit-theta-grid": {
        "state.beta_C": 1.3,
        "state.beta_H": 0.3,
        "state.E1": 1.0,
        "state.E2": 1.15,
        "state.rho_0": 0.3,
        "state.rho_5": 0.03,
        "state.rho_7": 0.07,
        "state.rho_8": 0.06,
        "state.eta": 1.0,
        "state.xi": 0.0,
        "unitary.theta01": 0.0,
        "unitary.theta02": 0.0,
    },
    "nonideal-eps-delta": {
        "state.beta_C": 1.13,
        "state.beta_H": 0.9618,
        "state.gamma": -0.19,
        "unitary.J": 220.0,
        "unitary.t": 0.004,
        "eps": 0.0,
        "Delta": 0.0,
    },
    "custom": {},
}

# short axis names per scenario -> config key
AXIS_ALIASES: dict[str, dict[str, str]] = {
    "experiment-time": {"t": "unitary.t"},
    "qubit-theta-eta": {"theta": "unitary.theta", "eta": "state.eta", "P00": "state.P00"},
    "qutrit-theta-grid": {
        "theta01": "unitary.theta01",
        "theta02": "unitary.theta02",
        "theta12": "unitary.theta12",
        "eta": "state.eta",
    },
    "nonideal-eps-delta": {"eps": "eps", "Delta": "Delta"},
    "custom": {},
}

DEFAULT_OUTPUTS: dict[str, tuple[str, ...]] = {
    "experiment-time": (
        "theta", "Q", "Q_tpm", "min_pw", "negativity",
        "t1_violated", "strong_backflow_violated", "min_pt_eig",
    ),
    "qubit-theta-eta": ("Q", "Q_tpm", "min_pw", "negativity", "t1_violated"),
    "qutrit-theta-grid": (
        "Q", "Q_tpm", "min_pw", "negativity",
        "t3_violated", "i4_violated", "t4_lower_violated", "t4_upper_violated",
    ),
    "nonideal-eps-delta": ("Q", "Q_tpm", "eps_actual", "jx", "t2_violated", "negativity"),
    "custom": ("Q", "Q_tpm", "min_pw", "negativity"),
}


@dataclass(frozen=True)
class SweepAxis:
    name: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ConfigError(f"axis {self.name!r} needs at least 2 points")
        if not self.hi > self.lo:
            raise ConfigError(f"axis {self.name!r} needs max > min")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class SweepSpec:
    scenario: str
    fixed: dict
    axes: tuple[SweepAxis, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if self.scenario not in SCENARIO_DEFAULTS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs one or two axes")
        aliases = AXIS_ALIASES[self.scenario]
        known = set(SCENARIO_DEFAULTS[self.scenario]) | set(self.fixed)
        for axis in self.axes:
            if self.scenario != "custom" and axis.name not in aliases and axis.name not in known:
                raise ConfigError(
                    f"axis {axis.name!r} is not a known parameter of {self.scenario}"
                )

    @classmethod
    def from_config(cls, cfg: dict) -> "SweepSpec":
        cfg = dict(cfg)
        scenario = cfg.pop("scenario", None)
        if scenario is None:
            raise ConfigError("config must set 'scenario'")
        axes = []
        for k in ("sweep.axis1", "sweep.axis2"):
            if f"{k}.name" in cfg:
                try:
                    axes.append(
                        SweepAxis(
                            name=str(cfg.pop(f"{k}.name")),
                            lo=float(cfg.pop(f"{k}.min")),
                            hi=float(cfg.pop(f"{k}.max")),
                            points=int(cfg.pop(f"{k}.points")),
                        )
                    )
                except KeyError as exc:
                    raise ConfigError(f"{k} is missing {exc}") from None
        outputs_raw = cfg.pop("outputs", None)
        if outputs_raw is None:
            outputs = DEFAULT_OUTPUTS.get(str(scenario), DEFAULT_OUTPUTS["custom"])
        else:
            outputs = tuple(s.strip() for s in str(outputs_raw).split(",") if s.strip())
        fixed = {k: v for k, v in cfg.items() if not k.startswith("sweep.")}
        return cls(scenario=str(scenario), fixed=fixed, axes=tuple(axes), outputs=outputs)

    def resolved_fixed(self) -> dict:
        params = dict(SCENARIO_DEFAULTS[self.scenario])
        params.update(self.fixed)
        return params

    def axis_key(self, axis_name: str) -> str:
        return AXIS_ALIASES[self.scenario].get(axis_name, axis_name)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict]
    columns: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# qheatflow {__version__} sweep\n")
        buf.write(f"# timestamp: {self.metadata.get('timestamp', '')}\n")
        buf.write(f"# scenario: {self.spec.scenario}\n")
        buf.write(f"# config: {self.metadata.get('config', '')}\n")
        buf.write(
            f"# cells: {self.metadata.get('cells', len(self.rows))}"
            f" infeasible: {self.metadata.get('infeasible', 0)}\n"
        )
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_format_cell(row.get(c)) for c in self.columns) + "\n")
        return buf.getvalue()


def _format_cell(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _flag(verdict) -> int:
    if verdict is None:
        return -2
    if not verdict.preconditions_ok:
        return -1
    return 1 if verdict.violated else 0


def _solve_jx_for_eps(j_hz: float, t: float, eps_target: float, jx_hi: float = 4000.0) -> float:
    """Invert eps(J_x) for the perturbed XY family by bisection."""
    if eps_target <= 0.0:
        return 0.0
    if perturbed_xy_unitary(j_hz, jx_hi, t).epsilon < eps_target:
        raise ConfigError(f"eps = {eps_target} not reachable below J_x = {jx_hi}")
    lo, hi = 0.0, jx_hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if perturbed_xy_unitary(j_hz, mid, t).epsilon < eps_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _build_cell(scenario: str, params: dict):
    """Construct (system, unitary_report, cell_extras) for one grid point."""
    extras: dict = {}
    if scenario == "experiment-time":
        sys = gamma_correlated_state(
            params["state.gamma"], params["state.beta_C"], params["state.beta_H"],
            gap=params["state.E"],
        )
        u = xy_exchange_unitary(params["unitary.J"], params["unitary.t"], gap=params["state.E"])
        extras["theta"] = rotation_angle(u)
    elif scenario == "qubit-theta-eta":
        sys = two_qubit_state(
            TwoQubitParams(
                beta_c=params["state.beta_C"],
                beta_h=params["state.beta_H"],
                p00=params["state.P00"],
                eta=params["state.eta"],
                xi=params["state.xi"],
                gap=params["state.E"],
            )
        )
        u = two_qubit_exchange_unitary(params["unitary.theta"], gap=params["state.E"])
        extras["theta"] = params["unitary.theta"]
    elif scenario == "qutrit-theta-grid":
        eta = params["state.eta"]
        xi = params["state.xi"]
        sys = two_qutrit_state(
            QutritStateParams(
                beta_c=params["state.beta_C"],
                beta_h=params["state.beta_H"],
                e1=params["state.E1"],
                e2=params["state.E2"],
                rho_0=params["state.rho_0"],
                rho_5=params["state.rho_5"],
                rho_7=params["state.rho_7"],
                rho_8=params["state.rho_8"],
                eta_13=eta, eta_26=eta, eta_57=eta,
                xi_13=xi, xi_26=xi, xi_57=xi,
            )
        )
        theta12 = params.get("unitary.theta12", params["unitary.theta02"])
        rots = [
            ManifoldRotation((0, 1), params["unitary.theta01"]),
            ManifoldRotation((0, 2), params["unitary.theta02"]),
            ManifoldRotation((1, 2), theta12),
        ]
        u = energy_preserving_unitary(sys.spectrum_c, rots)
    elif scenario == "nonideal-eps-delta":
        delta = params["Delta"]
        if not 0.0 <= delta < 1.0:
            raise ConfigError(f"Delta must lie in [0, 1), got {delta}")
        gap_h = (1.0 + delta) / (1.0 - delta)
        sys = gamma_correlated_state(
            params["state.gamma"], params["state.beta_C"], params["state.beta_H"],
            gap=1.0, gap_h=gap_h,
        )
        jx = _solve_jx_for_eps(params["unitary.J"], params["unitary.t"], params["eps"])
        u = perturbed_xy_unitary(params["unitary.J"], jx, params["unitary.t"])
        extras["jx"] = jx
        extras["eps_actual"] = u.epsilon if u.epsilon is not None else 0.0
        extras["Delta"] = delta
    elif scenario == "custom":
        sys, u, extras = _build_custom(params)
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    return sys, u, extras


def _build_custom(params: dict):
    extras: dict = {}
    kind = params.get("state.kind", "two-qubit")
    if kind == "two-qubit":
        sys = two_qubit_state(
            TwoQubitParams(
                beta_c=params["state.beta_C"],
                beta_h=params["state.beta_H"],
                p00=params["state.P00"],
                eta=params.get("state.eta", 0.0),
                xi=params.get("state.xi", 0.0),
                gap=params.get("state.E", 1.0),
            )
        )
    elif kind == "gamma":
        sys = gamma_correlated_state(
            params["state.gamma"], params["state.beta_C"], params["state.beta_H"],
            gap=params.get("state.E", 1.0), gap_h=params.get("state.E_H"),
        )
    elif kind == "two-qutrit":
        sys = two_qutrit_state(
            QutritStateParams(
                beta_c=params["state.beta_C"],
                beta_h=params["state.beta_H"],
                e1=params.get("state.E1", 1.0),
                e2=params.get("state.E2", 1.15),
                rho_0=params["state.rho_0"],
                rho_5=params["state.rho_5"],
                rho_7=params["state.rho_7"],
                rho_8=params["state.rho_8"],
                eta_13=params.get("state.eta_13", params.get("state.eta", 0.0)),
                eta_26=params.get("state.eta_26", params.get("state.eta", 0.0)),
                eta_57=params.get("state.eta_57", params.get("state.eta", 0.0)),
                xi_13=params.get("state.xi_13", params.get("state.xi", 0.0)),
                xi_26=params.get("state.xi_26", params.get("state.xi", 0.0)),
                xi_57=params.get("state.xi_57", params.get("state.xi", 0.0)),
            )
        )
    else:
        raise ConfigError(f"unknown state.kind {kind!r}")

    ukind = params.get("unitary.kind", "exchange")
    if ukind == "exchange":
        if sys.d_c == 2:
            u = two_qubit_exchange_unitary(
                params["unitary.theta"],
                kappa=params.get("unitary.kappa", 0.0),
                lam=params.get("unitary.lam", 0.0),
                phi=params.get("unitary.phi", 0.0),
                gap=params.get("state.E", 1.0),
            )
            extras["theta"] = params["unitary.theta"]
        else:
            rots = []
            d = sys.d_c
            for n in range(d):
                for m in range(n + 1, d):
                    key = f"unitary.theta{n}{m}"
                    if key in params:
                        rots.append(ManifoldRotation((n, m), params[key]))
            u = energy_preserving_unitary(sys.spectrum_c, rots)
    elif ukind == "xy":
        u = xy_exchange_unitary(params["unitary.J"], params["unitary.t"])
        extras["theta"] = rotation_angle(u)
    elif ukind == "perturbed-xy":
        u = perturbed_xy_unitary(
            params["unitary.J"], params.get("unitary.Jx", 0.0), params["unitary.t"]
        )
        extras["eps_actual"] = u.epsilon if u.epsilon is not None else 0.0
    else:
        raise ConfigError(f"unknown unitary.kind {ukind!r}")
    return sys, u, extras


def evaluate_cell(sys: BipartiteSystem, u, params: dict, extras: dict | None = None) -> dict:
    """All derived quantities and verdict flags for one (state, protocol) cell."""
    row: dict = dict(extras or {})
    beta_c, beta_h = sys.beta_c, sys.beta_h
    mh = mh_distribution(sys, u)
    tpm = tpm_distribution(sys, u)
    q = table_heat(mh)
    q_tpm = table_heat(tpm)
    report = flow_decomposition(mh, q_tpm=q_tpm)
    row.update(
        Q=q,
        Q_tpm=q_tpm,
        Q_back=report.q_back,
        Q_direct=report.q_direct,
        min_pw=mh.min_entry(),
        negativity=int(mh.min_entry() < NEGATIVITY_THRESHOLD),
        min_pt_eig=min_partial_transpose_eigenvalue(sys),
    )

    resonant_qubits = (
        sys.dims == (2, 2) and sys.spectrum_c == sys.spectrum_h
    )
    if resonant_qubits and beta_c is not None and beta_c != beta_h:
        v1 = two_qubit_flow_witness(
            q, q_tpm, beta_c, beta_h,
            gap=sys.spectrum_c.levels[1], commutator_norm=u.commutator_norm,
        )
        row["t1_violated"] = _flag(v1)
        row["t1_bound"] = v1.bound

    if "eps_actual" in row and beta_c is not None and beta_c != beta_h:
        v2 = nonideal_flow_witness(
            q, q_tpm, beta_c, beta_h,
            e_c=sys.spectrum_c.levels[1], e_h=sys.spectrum_h.levels[1],
            epsilon=row["eps_actual"],
        )
        row["t2_violated"] = _flag(v2)
        row["t2_bound"] = v2.bound

    if beta_c is not None and beta_h is not None and beta_c != beta_h:
        try:
            chi = xft_coherence_term(sys, u)
            xft = xft_average(mh, sys).with_chi(chi)
            row["chi_bar"] = chi
            row["xft_lhs"] = xft.lhs
            row["avg_delta_I"] = xft.avg_delta_i
            v3 = xft_flow_witness(q, xft, beta_c, beta_h)
            row["t3_violated"] = _flag(v3)
            row["t3_bound"] = v3.bound
        except DivergenceError:
            row["t3_violated"] = -2
        try:
            corr = heat_exp_correction(sys, u)
            row["j_term"] = corr.j
            v4 = correlation_flow_witness(q, corr.j, beta_c, beta_h)
            row["i4_violated"] = _flag(v4)
            row["i4_bound"] = v4.bound
        except DivergenceError:
            row["i4_violated"] = -2
        vs = strong_backflow_witness(q, beta_c, beta_h, sys.d_c)
        row["strong_backflow_violated"] = _flag(vs)
        row["strong_backflow_bound"] = vs.bound

    if sys.spectrum_c == sys.spectrum_h and sys.spectrum_c.bohr_nondegenerate():
        try:
            lower, upper = tpm_band_witness(q, tpm)
            row["t4_lower_violated"] = _flag(lower)
            row["t4_upper_violated"] = _flag(upper)
            row["t4_lower_bound"] = lower.bound
            row["t4_upper_bound"] = upper.bound
        except ValueError:
            row["t4_lower_violated"] = -2
            row["t4_upper_violated"] = -2
    return row


def _infeasible_row(reason: str) -> dict:
    return {"status": f"infeasible:{reason}"}


def run_sweep(spec: SweepSpec, threads: int | None = None) -> SweepResult:
    """Evaluate every grid cell; rows are ordered by grid index."""
    params_base = spec.resolved_fixed()
    axes_values = [axis.values() for axis in spec.axes]
    grid: list[tuple] = []
    if len(axes_values) == 1:
        grid = [(v,) for v in axes_values[0]]
    else:
        grid = [(a, b) for a in axes_values[0] for b in axes_values[1]]

    def one(cell_values: tuple) -> dict:
        params = dict(params_base)
        for axis, value in zip(spec.axes, cell_values):
            params[spec.axis_key(axis.name)] = float(value)
        row = {axis.name: float(v) for axis, v in zip(spec.axes, cell_values)}
        try:
            sys, u, extras = _build_cell(spec.scenario, params)
            row.update(evaluate_cell(sys, u, params, extras))
            row["status"] = "ok"
        except InfeasibleStateError as exc:
            row.update(_infeasible_row(exc.constraint))
        return row

    if threads is None:
        threads = int(os.environ.get("QHEATFLOW_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(cell) for cell in grid]

    infeasible = sum(1 for r in rows if r.get("status", "").startswith("infeasible"))
    columns = tuple(a.name for a in spec.axes) + tuple(spec.outputs) + ("status",)
    meta = {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": format_config({**{f"axis.{a.name}": f"[{a.lo},{a.hi}]x{a.points}" for a in spec.axes}, **params_base}),
        "cells": len(rows),
        "infeasible": infeasible,
    }
    return SweepResult(spec=spec, rows=rows, columns=columns, metadata=meta)


@dataclass
class PointReport:
    """Everything the single-point analysis produces."""

    config: dict
    system: BipartiteSystem
    row: dict
    mh_csv: str
    tpm_csv: str
    probe_target: tuple[int, int]
    probe_eps: float
    probe_values: np.ndarray
    probe_stderr: np.ndarray | None
    marginal_deviation: float

    def render(self) -> str:
        lines = [f"qheatflow {__version__} point analysis"]
        lines.append(f"dims: {self.system.dims}")
        lines.append(
            "state: trace=1, hermitian, psd ok; "
            f"min_pt_eig={self.row['min_pt_eig']:.6g}"
        )
        if self.system.dims in ((2, 2), (2, 3), (3, 2)):
            sep = "separable" if self.row["min_pt_eig"] >= -1e-10 else "entangled"
            lines.append(f"partial-transpose criterion: {sep}")
        lines.append(f"marginal identity deviation: {self.marginal_deviation:.3g}")
        for key in (
            "Q", "Q_tpm", "Q_back", "Q_direct", "min_pw", "negativity",
            "chi_bar", "xft_lhs", "avg_delta_I", "j_term",
        ):
            if key in self.row:
                lines.append(f"{key}: {self.row[key]:.12g}")
        for key in sorted(self.row):
            if key.endswith("_violated"):
                flag = {1: "VIOLATED", 0: "satisfied", -1: "precondition failed", -2: "not evaluable"}[
                    self.row[key]
                ]
                bound_key = key.replace("_violated", "_bound")
                extra = f" (bound {self.row[bound_key]:.6g})" if bound_key in self.row else ""
                lines.append(f"{key[:-9]}: {flag}{extra}")
        lines.append(
            f"probe reconstruction at target {self.probe_target}, eps={self.probe_eps:g}:"
        )
        lines.append("  " + np.array2string(self.probe_values, precision=10))
        if self.probe_stderr is not None:
            lines.append("  stderr " + np.array2string(self.probe_stderr, precision=3))
        return "\n".join(lines)


def analyze_point(cfg: dict) -> PointReport:
    """Evaluate a single fully-specified configuration.

    Raises InfeasibleStateError when the state cannot be constructed (the
    CLI maps that to exit code 2).
    """
    scenario = cfg.get("scenario", "custom")
    if scenario not in SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    params = dict(SCENARIO_DEFAULTS[scenario])
    params.update({k: v for k, v in cfg.items() if k != "scenario"})
    sys, u, extras = _build_cell(scenario, params)
    params["scenario"] = scenario
    row = evaluate_cell(sys, u, params, extras)
    mh = mh_distribution(sys, u)
    tpm = tpm_distribution(sys, u)
    from .fluctuations import marginal_check  # local to avoid cycle at import time

    target = (
        int(params.get("probe.i_C", 0)),
        int(params.get("probe.i_H", min(1, sys.d_h - 1))),
    )
    eps = float(params.get("probe.eps", 0.2))
    stats = probe_statistics(sys, u, target, eps)
    shots = int(params.get("probe.shots", 0))
    if shots > 0:
        sampled = sampled_reconstruction(stats, shots, int(params.get("probe.seed", 7)))
        probe_values, probe_stderr = sampled.values, sampled.stderr
    else:
        probe_values, probe_stderr = reconstruct_quasiprobability(stats), None
    return PointReport(
        config=params,
        system=sys,
        row=row,
        mh_csv=mh.to_csv(),
        tpm_csv=tpm.to_csv(),
        probe_target=target,
        probe_eps=eps,
        probe_values=probe_values,
        probe_stderr=probe_stderr,
        marginal_deviation=marginal_check(mh, sys, u),
    )


def probe_row_csv(
    sys: BipartiteSystem, u, target: tuple[int, int], eps: float, shots: int = 0, seed: int = 7
) -> str:
    """Targeted-row reconstruction in the transition-table CSV schema."""
    stats = probe_statistics(sys, u, target, eps)
    if shots > 0:
        sampled = sampled_reconstruction(stats, shots, seed)
        values, stderr = sampled.values, sampled.stderr
    else:
        values, stderr = reconstruct_quasiprobability(stats), np.zeros_like(stats.q_plus)
    i_c, i_h = target
    buf = io.StringIO()
    buf.write("i_C,i_H,f_C,f_H,value,dE_C,dE_H,stderr\n")
    for f_c in range(values.shape[0]):
        for f_h in range(values.shape[1]):
            de_c = stats.energies_c[i_c] - stats.energies_c[f_c]
            de_h = stats.energies_h[i_h] - stats.energies_h[f_h]
            buf.write(
                f"{i_c},{i_h},{f_c},{f_h},{values[f_c, f_h]:.17g},"
                f"{de_c:.17g},{de_h:.17g},{stderr[f_c, f_h]:.17g}\n"
            )
    return buf.getvalue()
