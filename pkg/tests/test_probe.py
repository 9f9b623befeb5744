import numpy as np
import pytest

from qheatflow.dynamics import xy_exchange_unitary
from qheatflow.fluctuations import mh_distribution, tpm_distribution
from qheatflow.probe import (
    probe_effects,
    probe_statistics,
    reconstruct_quasiprobability,
    sampled_reconstruction,
)
from qheatflow.properties import random_system_and_unitary
from qheatflow.states import gamma_correlated_state

BC, BH = 1.13, 0.9618


def _negativity_pair():
    sys = gamma_correlated_state(-0.19, BC, BH)
    return sys, xy_exchange_unitary(215.1, 6e-4)


def test_povm_completeness_and_form():
    for eps in (0.05, 0.2, np.pi / 4):
        e_plus, e_minus = probe_effects(eps, 4, 1)
        assert np.max(np.abs(e_plus + e_minus - np.eye(4))) < 1e-12
        s = np.sin(2 * eps)
        pi_op = np.zeros((4, 4))
        pi_op[1, 1] = 1.0
        assert np.max(np.abs(e_plus - ((1 - s) * np.eye(4) / 2 + s * pi_op))) < 1e-12


def test_delta_q_identity_random(rng):
    for _ in range(15):
        dim = 2 if rng.random() < 0.5 else 3
        sys, u, _ = random_system_and_unitary(rng, dim)
        mh = mh_distribution(sys, u)
        i_c = int(rng.integers(0, sys.d_c))
        i_h = int(rng.integers(0, sys.d_h))
        eps = float(rng.uniform(0.02, np.pi / 2 - 0.02))
        stats = probe_statistics(sys, u, (i_c, i_h), eps)
        dq = stats.q_plus - stats.q_minus
        ident = np.sin(2 * eps) * (2 * mh.values[i_c, i_h] - stats.p_undisturbed)
        assert np.max(np.abs(dq - ident)) < 1e-12


def test_reconstruction_is_exact_at_finite_coupling(rng):
    sys, u, _ = random_system_and_unitary(rng, 2)
    mh = mh_distribution(sys, u)
    recs = []
    for eps in (0.05, 0.2, np.pi / 4):
        stats = probe_statistics(sys, u, (0, 1), eps)
        rec = reconstruct_quasiprobability(stats)
        recs.append(rec)
        assert np.max(np.abs(rec - mh.values[0, 1])) < 1e-10
    # coupling independence
    assert np.max(np.abs(recs[0] - recs[2])) < 1e-10


def test_reconstruction_recovers_negative_entry():
    sys, u = _negativity_pair()
    mh = mh_distribution(sys, u)
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    rec = reconstruct_quasiprobability(stats)
    assert mh.values[0, 1].min() < -1e-3
    assert np.max(np.abs(rec - mh.values[0, 1])) < 1e-10


def test_diagonal_state_reconstructs_tpm_entries(rng):
    sys, u, _ = random_system_and_unitary(rng, 2)
    diag = sys.with_rho(np.diag(np.diag(sys.rho)))
    tpm = tpm_distribution(diag, u)
    stats = probe_statistics(diag, u, (1, 0), 0.3)
    rec = reconstruct_quasiprobability(stats)
    assert np.max(np.abs(rec - tpm.values[1, 0])) < 1e-12


def test_quarter_coupling_simplifies_coefficient():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), np.pi / 4)  # sin(2 eps) = 1
    rec = reconstruct_quasiprobability(stats)
    manual = (stats.q_plus - stats.q_minus) / 2.0 + stats.p_undisturbed / 2.0
    assert np.array_equal(rec, manual)


def test_eps_range_validation():
    sys, u = _negativity_pair()
    for bad in (0.0, -0.1, np.pi / 2, 2.0):
        with pytest.raises(ValueError):
            probe_statistics(sys, u, (0, 1), bad)


def test_probe_statistics_normalization():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.1)
    assert stats.q_plus.sum() + stats.q_minus.sum() == pytest.approx(1.0, abs=1e-12)
    assert stats.p_undisturbed.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# sampling layer
# ---------------------------------------------------------------------------

def test_sampling_deterministic_given_seed():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    a = sampled_reconstruction(stats, 5000, seed=123)
    b = sampled_reconstruction(stats, 5000, seed=123)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.stderr, b.stderr)
    c = sampled_reconstruction(stats, 5000, seed=124)
    assert not np.array_equal(a.values, c.values)


def test_single_shot_frequencies_are_indicator_valued():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    s = sampled_reconstruction(stats, 1, seed=5)
    for freq in (s.f_plus, s.f_minus, s.f_free):
        assert np.all(np.isin(freq, [0.0, 1.0]))
    assert s.f_plus.sum() + s.f_minus.sum() == 1.0
    assert s.f_free.sum() == 1.0


def test_sampling_converges_to_exact_at_large_shots():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    exact = reconstruct_quasiprobability(stats)
    s = sampled_reconstruction(stats, 10**6, seed=99)
    dev = np.abs(s.values - exact)
    assert np.all(dev <= 5.0 * s.stderr + 1e-12)


def test_stderr_scales_as_inverse_sqrt_shots():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    small = sampled_reconstruction(stats, 10**4, seed=7)
    large = sampled_reconstruction(stats, 10**6, seed=7)
    ratio = small.stderr / np.maximum(large.stderr, 1e-300)
    finite = ratio[np.isfinite(ratio) & (small.stderr > 0)]
    assert np.all((finite > 6.0) & (finite < 16.0))  # ~10 expected


def test_sampling_validates_shot_count():
    sys, u = _negativity_pair()
    stats = probe_statistics(sys, u, (0, 1), 0.2)
    with pytest.raises(ValueError):
        sampled_reconstruction(stats, 0, seed=1)
