import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qheatflow.dynamics import (
    ManifoldRotation,
    energy_preserving_unitary,
    two_qubit_exchange_unitary,
    xy_exchange_unitary,
)
from qheatflow.fluctuations import (
    DivergenceError,
    MH_LOWER_BOUND,
    average_heat,
    exchange_heat_shift,
    exchange_manifold_pw,
    exchange_manifold_tpm,
    flow_decomposition,
    heat_exp_correction,
    heat_report,
    marginal_check,
    max_heat_coherence_shift,
    mh_distribution,
    table_heat,
    tpm_distribution,
    two_qubit_exchange_probs,
    two_qubit_heat,
    two_qubit_tpm_heat,
    xft_average,
    xft_coherence_term,
)
from qheatflow.properties import (
    random_rotations,
    random_system_and_unitary,
    random_two_qubit_system,
    random_two_qutrit_system,
)
from qheatflow.states import (
    EnergySpectrum,
    TwoQubitParams,
    dephase,
    gamma_correlated_state,
    two_qubit_state,
)

BC, BH = 1.13, 0.9618


def _experiment_pair(t=6e-4, gamma=-0.19):
    sys = gamma_correlated_state(gamma, BC, BH)
    return sys, xy_exchange_unitary(215.1, t)


# ---------------------------------------------------------------------------
# table basics
# ---------------------------------------------------------------------------

def test_identity_unitary_gives_diagonal_tables():
    sys, _ = _experiment_pair()
    eye = np.eye(4)
    for table in (tpm_distribution(sys, eye), mh_distribution(sys, eye)):
        pops = sys.populations().reshape(2, 2)
        for i_c in range(2):
            for i_h in range(2):
                for f_c in range(2):
                    for f_h in range(2):
                        expected = (
                            pops[i_c, i_h] if (i_c, i_h) == (f_c, f_h) else 0.0
                        )
                        assert table.entry(i_c, i_h, f_c, f_h) == pytest.approx(
                            expected, abs=1e-14
                        )


def test_mh_equals_tpm_for_diagonal_state():
    sys, u = _experiment_pair(gamma=0.0)
    mh = mh_distribution(sys, u)
    tpm = tpm_distribution(sys, u)
    assert np.max(np.abs(mh.values - tpm.values)) < 1e-14


def test_tpm_independent_of_coherence():
    _, u = _experiment_pair()
    with_coh = tpm_distribution(gamma_correlated_state(-0.19, BC, BH), u)
    without = tpm_distribution(gamma_correlated_state(0.0, BC, BH), u)
    assert np.max(np.abs(with_coh.values - without.values)) < 1e-14


def test_mh_has_negative_entry_in_backflow_window():
    sys, u = _experiment_pair(t=6e-4)
    mh = mh_distribution(sys, u)
    assert mh.min_entry() < -1e-3
    assert mh.min_entry() >= MH_LOWER_BOUND - 1e-10
    assert mh.values.sum() == pytest.approx(1.0, abs=1e-12)


def test_block_dephasing_leaves_tables_unchanged():
    sys, u = _experiment_pair()
    deph = dephase(sys)
    assert np.max(np.abs(mh_distribution(deph, u).values - mh_distribution(sys, u).values)) < 1e-14
    assert np.max(np.abs(tpm_distribution(deph, u).values - tpm_distribution(sys, u).values)) < 1e-14


def test_csv_round_trip_precision():
    sys, u = _experiment_pair()
    mh = mh_distribution(sys, u)
    text = mh.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "i_C,i_H,f_C,f_H,value,dE_C,dE_H"
    assert len(lines) == 1 + 16
    for line in lines[1:]:
        parts = line.split(",")
        i_c, i_h, f_c, f_h = (int(p) for p in parts[:4])
        assert float(parts[4]) == mh.entry(i_c, i_h, f_c, f_h)  # 17 digits: lossless


# ---------------------------------------------------------------------------
# marginal identities
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 3]))
def test_mh_marginals_random(seed, dim):
    gen = np.random.default_rng(seed)
    sys, u, _ = random_system_and_unitary(gen, dim)
    mh = mh_distribution(sys, u)
    assert marginal_check(mh, sys, u) < 1e-10


def test_tpm_final_marginal_vs_dephased_evolution(rng):
    sys, u, _ = random_system_and_unitary(rng, 2)
    tpm = tpm_distribution(sys, u)
    assert marginal_check(tpm, sys, u) < 1e-10
    diag = sys.with_rho(np.diag(np.diag(sys.rho)))
    evolved = u.matrix @ diag.rho @ u.matrix.conj().T
    got = tpm.final_marginal()
    assert np.max(np.abs(got - np.real(np.diag(evolved)).reshape(2, 2))) < 1e-12


def test_tpm_marginals_deviate_from_undisturbed_state():
    sys, u = _experiment_pair(t=6e-4)
    tpm = tpm_distribution(sys, u)
    assert marginal_check(tpm, sys, u, against_dephased=False) > 1e-3


# ---------------------------------------------------------------------------
# heat functionals
# ---------------------------------------------------------------------------

def test_heat_zero_for_identity():
    sys, _ = _experiment_pair()
    assert average_heat(sys, np.eye(4)) == 0.0
    assert table_heat(mh_distribution(sys, np.eye(4))) == pytest.approx(0.0, abs=1e-15)


def test_heat_closed_form_two_qubit(rng):
    for _ in range(30):
        sys, params = random_two_qubit_system(rng)
        theta = rng.uniform(0, np.pi)
        u = two_qubit_exchange_unitary(theta)
        q = average_heat(sys, u)
        assert q == pytest.approx(
            two_qubit_heat(theta, params.eta, params.xi, params.beta_c, params.beta_h),
            abs=1e-12,
        )
        q_tpm = table_heat(tpm_distribution(sys, u))
        assert q_tpm == pytest.approx(
            two_qubit_tpm_heat(theta, params.beta_c, params.beta_h), abs=1e-12
        )
        assert q_tpm <= 1e-12  # no backflow in the measured scheme
        # heat from the MH table reproduces the operator expression
        assert table_heat(mh_distribution(sys, u)) == pytest.approx(q, abs=1e-10)


def test_heat_coherence_free_case_matches_tpm(rng):
    sys, params = random_two_qubit_system(rng, coherent=False)
    u = two_qubit_exchange_unitary(1.1)
    assert average_heat(sys, u) == pytest.approx(
        table_heat(tpm_distribution(sys, u)), abs=1e-12
    )


def test_flow_decomposition_identity_and_negative_contributions():
    sys, u = _experiment_pair(t=6e-4)
    mh = mh_distribution(sys, u)
    report = flow_decomposition(mh)
    assert report.q == pytest.approx(report.q_back - report.q_direct, abs=1e-10)
    assert report.q > 0  # backflow window
    # the only negative entry sits on the direct-direction transition
    # (E_iC < E_fC), so it contributes positively to the backflow term
    negs = dict(report.negative_entries)
    assert ((0, 1, 1, 0) in negs) and negs[(0, 1, 1, 0)] < 0
    v = mh.values.copy()
    v[0, 1, 1, 0] = 0.0
    pos_only = float((np.clip(v, 0, None) * mh.delta_e_c())[mh.delta_e_c() > 0].sum())
    assert report.q_back > pos_only  # negative entry enlarged the back flow


def test_flow_decomposition_all_positive_table():
    sys, u = _experiment_pair(gamma=0.0, t=6e-4)
    report = flow_decomposition(mh_distribution(sys, u))
    assert report.negative_entries == ()
    assert report.q_back >= 0 and report.q_direct >= 0
    assert report.q == pytest.approx(report.q_back - report.q_direct, abs=1e-12)


def test_heat_report_convenience():
    sys, u = _experiment_pair(t=6e-4)
    report = heat_report(sys, u)
    assert report.q_tpm == pytest.approx(table_heat(tpm_distribution(sys, u)))
    assert report.q == pytest.approx(average_heat(sys, u), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_flow_identity_random_qutrits(seed):
    gen = np.random.default_rng(seed)
    sys, u, _ = random_system_and_unitary(gen, 3)
    report = flow_decomposition(mh_distribution(sys, u))
    assert report.q == pytest.approx(report.q_back - report.q_direct, abs=1e-10)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def test_two_qubit_exchange_prob_formulas(rng):
    sys, params = random_two_qubit_system(rng)
    theta, phi, lam = 0.8, 0.5, 1.7
    u = two_qubit_exchange_unitary(theta, lam=lam, phi=phi)
    mh = mh_distribution(sys, u)
    cf = two_qubit_exchange_probs(
        theta, params.eta, params.xi, params.beta_c, params.beta_h, params.p00,
        phi=phi, lam=lam,
    )
    assert mh.entry(0, 1, 1, 0) == pytest.approx(cf["mh_01_10"], abs=1e-12)
    assert mh.entry(1, 0, 0, 1) == pytest.approx(cf["mh_10_01"], abs=1e-12)


def test_kappa_phase_leaves_tables_unchanged(rng):
    sys, _ = random_two_qubit_system(rng)
    base = two_qubit_exchange_unitary(0.9, lam=0.3, phi=0.7)
    shifted = two_qubit_exchange_unitary(0.9, kappa=1.3, lam=0.3, phi=0.7)
    assert np.max(np.abs(mh_distribution(sys, base).values - mh_distribution(sys, shifted).values)) < 1e-14
    assert np.max(np.abs(tpm_distribution(sys, base).values - tpm_distribution(sys, shifted).values)) < 1e-14


def test_phase_dependence_only_through_sum(rng):
    # MH entries depend on (xi, phi, lam) only via cos(xi + phi + lam)
    sys = two_qubit_state(TwoQubitParams(BC, BH, 0.547, eta=0.1, xi=0.4))
    sys2 = two_qubit_state(TwoQubitParams(BC, BH, 0.547, eta=0.1, xi=1.0))
    u1 = two_qubit_exchange_unitary(0.8, lam=0.9, phi=0.2)  # sum = 1.5
    u2 = two_qubit_exchange_unitary(0.8, lam=0.1, phi=0.4)  # sum = 1.5
    assert np.max(np.abs(mh_distribution(sys, u1).values - mh_distribution(sys2, u2).values)) < 1e-12


def test_qudit_closed_form_zero_angle():
    gen = np.random.default_rng(5)
    sys, _ = random_two_qutrit_system(gen)
    rots = [ManifoldRotation(p, 0.0) for p in ((0, 1), (0, 2), (1, 2))]
    assert all(abs(v) == 0.0 for v in exchange_manifold_pw(sys, rots).values())


def test_qudit_closed_form_matches_matrix_route(qutrit_ensemble):
    for sys, u, rots in qutrit_ensemble[:60]:
        mh = mh_distribution(sys, u)
        tpm = tpm_distribution(sys, u)
        for key, val in exchange_manifold_pw(sys, rots).items():
            assert val == pytest.approx(mh.entry(*key), abs=1e-12)
        for key, val in exchange_manifold_tpm(sys, rots).items():
            assert val == pytest.approx(tpm.entry(*key), abs=1e-12)


def test_exchange_heat_shift_matches_q_difference(qutrit_ensemble):
    for sys, u, rots in qutrit_ensemble[:40]:
        shift = average_heat(sys, u) - table_heat(tpm_distribution(sys, u))
        assert shift == pytest.approx(exchange_heat_shift(sys, rots), abs=1e-12)


def test_max_coherence_shift_attained_at_quarter_rotation():
    gen = np.random.default_rng(6)
    sys, _ = random_two_qutrit_system(gen)
    target = max_heat_coherence_shift(sys)
    rots = []
    for pair in ((0, 1), (0, 2), (1, 2)):
        a, b = pair[0] * 3 + pair[1], pair[1] * 3 + pair[0]
        xi = float(np.angle(sys.rho[a, b]))
        rots.append(ManifoldRotation(pair, np.pi / 4, phi=0.0, lam=-xi))
    u = energy_preserving_unitary(sys.spectrum_c, rots)
    shift = abs(average_heat(sys, u) - table_heat(tpm_distribution(sys, u)))
    assert shift == pytest.approx(target, abs=1e-12)
    # and the shift never exceeds the cap on a random grid
    for theta in np.linspace(0, np.pi, 9):
        rots2 = [ManifoldRotation(p, theta) for p in ((0, 1), (0, 2), (1, 2))]
        u2 = energy_preserving_unitary(sys.spectrum_c, rots2)
        s2 = abs(average_heat(sys, u2) - table_heat(tpm_distribution(sys, u2)))
        assert s2 <= target + 1e-12


def test_max_coherence_shift_zero_without_coherence():
    gen = np.random.default_rng(7)
    sys, _ = random_two_qutrit_system(gen, coherent=False)
    assert max_heat_coherence_shift(sys) == 0.0


# ---------------------------------------------------------------------------
# exchange-fluctuation machinery
# ---------------------------------------------------------------------------

def test_chi_bar_zero_for_diagonal_state(rng):
    sys, _ = random_two_qubit_system(rng, coherent=False)
    u = two_qubit_exchange_unitary(0.7)
    assert xft_coherence_term(sys, u) == 0.0


def test_chi_bar_zero_for_identity(rng):
    sys, _ = random_two_qubit_system(rng)
    assert xft_coherence_term(sys, np.eye(4)) == pytest.approx(0.0, abs=1e-15)


def test_chi_bar_divergence_on_starved_population():
    params = TwoQubitParams(BC, BH, 0.0)
    _, upper = params.p00_bounds()
    p00 = upper - 1e-13  # one population collapses to ~1e-13
    cap = TwoQubitParams(BC, BH, p00).eta_cap()
    sys = two_qubit_state(TwoQubitParams(BC, BH, p00, eta=0.9 * cap))
    with pytest.raises(DivergenceError):
        xft_coherence_term(sys, two_qubit_exchange_unitary(0.6))


def test_xft_uncorrelated_diagonal_recovers_unity():
    z_c = 1.0 + np.exp(-BC)
    z_h = 1.0 + np.exp(-BH)
    sys = two_qubit_state(TwoQubitParams(BC, BH, p00=1.0 / (z_c * z_h)))
    u = two_qubit_exchange_unitary(0.9)
    rep = xft_average(mh_distribution(sys, u), sys)
    assert rep.resonance_ok
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert rep.avg_delta_i == pytest.approx(0.0, abs=1e-12)


def test_xft_classically_correlated_recovers_unity(rng):
    # eta = 0 but P00 away from the product value
    sys, params = random_two_qubit_system(rng, coherent=False)
    u = two_qubit_exchange_unitary(1.2)
    rep = xft_average(mh_distribution(sys, u), sys)
    assert rep.lhs == pytest.approx(1.0, abs=1e-10)


def test_xft_identity_with_coherence(qubit_ensemble, qutrit_ensemble):
    for sys, u, _ in qubit_ensemble[:50] + qutrit_ensemble[:30]:
        mh = mh_distribution(sys, u)
        rep = xft_average(mh, sys).with_chi(xft_coherence_term(sys, u))
        assert rep.resonance_ok
        assert rep.identity_gap() < 1e-8


def test_xft_divergence_for_zero_population_with_weight():
    params = TwoQubitParams(BC, BH, 0.0)
    _, upper = params.p00_bounds()
    sys = two_qubit_state(TwoQubitParams(BC, BH, p00=upper))  # one population exactly 0
    u = two_qubit_exchange_unitary(np.pi / 4)
    with pytest.raises(DivergenceError):
        xft_average(mh_distribution(sys, u), sys)


def test_xft_resonance_flag_for_detuned_pair():
    sys = gamma_correlated_state(-0.1, BC, BH, gap=1.0, gap_h=1.2)
    u = xy_exchange_unitary(215.1, 6e-4)
    rep = xft_average(mh_distribution(sys, u), sys)
    assert not rep.resonance_ok
    assert rep.max_energy_mismatch == pytest.approx(0.2, abs=1e-12)


def test_j_term_zero_for_product_diagonal():
    z_c = 1.0 + np.exp(-BC)
    z_h = 1.0 + np.exp(-BH)
    sys = two_qubit_state(TwoQubitParams(BC, BH, p00=1.0 / (z_c * z_h)))
    corr = heat_exp_correction(sys, two_qubit_exchange_unitary(0.9))
    assert corr.j == pytest.approx(0.0, abs=1e-14)
    assert corr.population_norm == pytest.approx(0.0, abs=1e-14)


def test_j_term_classical_part_vanishes_with_product_populations():
    # coherence present, but populations equal to the product values
    z_c = 1.0 + np.exp(-BC)
    z_h = 1.0 + np.exp(-BH)
    sys = two_qubit_state(TwoQubitParams(BC, BH, p00=1.0 / (z_c * z_h), eta=0.05))
    corr = heat_exp_correction(sys, two_qubit_exchange_unitary(0.9))
    assert corr.population_norm == pytest.approx(0.0, abs=1e-14)
    assert corr.coherence_norm > 0.0


def test_j_term_identity(qubit_ensemble):
    for sys, u, _ in qubit_ensemble[:40]:
        mh = mh_distribution(sys, u)
        corr = heat_exp_correction(sys, u)
        direct = float(
            (mh.values * np.exp((sys.beta_c - sys.beta_h) * mh.delta_e_c())).sum()
        )
        assert 1.0 + corr.j == pytest.approx(direct, abs=1e-10)
        assert corr.j <= corr.norm_bound + 1e-10


def test_j_term_divergence_for_vanishing_marginal():
    sys = gamma_correlated_state(0.0, 800.0, 700.0)  # marginals flush to (1, 0)
    with pytest.raises(DivergenceError):
        heat_exp_correction(sys, two_qubit_exchange_unitary(0.4))
