import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subspectra.diagnostics import (
    ALT_ENUMERATION_CAP,
    alt_estimator_value,
    alt_estimator_variance,
    sampling_strategy_variance,
)
from subspectra.eigensolver import SizeCapError

from conftest import system
from oracles import block_toy, dense_toy, random_state


def _h2():
    _, sec, H, _, psi0, psi_A, _ = system("h2_sto3g", "+1 -0")
    return sec, H.toarray() if hasattr(H, "toarray") else np.asarray(H), psi0, psi_A


# --- sampling strategy -------------------------------------------------------


def test_sampling_variance_vanishes_at_t0():
    _, H, _, _ = _h2()
    rep = sampling_strategy_variance(random_state(4, 3), H, 0.0)
    assert abs(rep.exact_var) < 1e-14
    assert abs(rep.predicted_var) < 1e-14


def test_sampling_variance_vanishes_for_eigenstate():
    _, H, psi0, _ = _h2()
    for t in (0.5, 3.0, 17.0):
        rep = sampling_strategy_variance(psi0, H, t)
        assert abs(abs(rep.l_a_exact) - 1) < 1e-12
        assert abs(rep.exact_var) < 1e-12


def test_sampling_variance_h2_t5_matches_closed_form():
    _, H, _, _ = _h2()
    rep = sampling_strategy_variance(random_state(4, 7), H, 5.0)
    assert rep.closure == pytest.approx(1.0, abs=1e-13)
    assert abs(rep.exact_var - (1 - abs(rep.l_a_exact) ** 2)) < 1e-12
    assert abs(rep.mean_exact - rep.l_a_exact) < 1e-12


def test_sampling_variance_single_determinant_falls_below_bound():
    # a one-determinant state gives a constant estimator; the closed form is only an upper bound
    _, H, _, psi_A = _h2()
    rep = sampling_strategy_variance(psi_A, H, 5.0)
    assert abs(rep.exact_var) < 1e-12
    assert rep.closure < 1
    assert rep.exact_var <= rep.predicted_var + 1e-12


def test_sampling_variance_empirical_close_to_exact():
    _, H, _, _ = _h2()
    n = 200_000
    rep = sampling_strategy_variance(random_state(4, 11), H, 2.0, n_draws=n, seed=5)
    assert rep.empirical_var >= 0
    assert abs(rep.empirical_mean - rep.l_a_exact) < 5 * np.sqrt(rep.exact_var / n)
    assert rep.empirical_var == pytest.approx(rep.exact_var, rel=0.05)


def test_sampling_variance_size_cap():
    H = np.eye(5000)
    with pytest.raises(SizeCapError):
        sampling_strategy_variance(np.ones(5000) / np.sqrt(5000), H, 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(0.0, 50.0))
def test_sampling_variance_identity_full_support(seed, t):
    H = dense_toy(6, seed)
    rep = sampling_strategy_variance(random_state(6, seed + 1), H, t)
    assert abs(rep.exact_var - rep.predicted_var) < 1e-11


# --- alternative estimator ---------------------------------------------------


def test_alt_value_at_t0_is_one():
    psi = random_state(4, 2)
    for x in range(4):
        assert alt_estimator_value(psi[x], psi[x], 1.0 + 0j) == pytest.approx(1.0)


def test_alt_value_rejects_zero_amplitudes():
    with pytest.raises(ZeroDivisionError):
        alt_estimator_value(0.5, 0.5, 0.0)
    with pytest.raises(ZeroDivisionError):
        alt_estimator_value(0.0, 0.5, 0.3)


def test_alt_value_conditional_mean_is_local_estimator():
    # sum over y of p(y|x) f(y, x) equals l(x) = <psi_A|U|x>/psi_A*(x)
    H = dense_toy(4, 9)
    psi = random_state(4, 9)
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(-1j * w * 1.7)) @ V.conj().T
    for x in range(4):
        avg = sum(abs(U[y, x]) ** 2 * alt_estimator_value(psi[x], psi[y], U[y, x]) for y in range(4))
        ell = np.vdot(psi, U[:, x]) / np.conj(psi[x])
        assert abs(avg - ell) < 1e-12


def test_alt_variance_t0():
    H = dense_toy(8, 1)
    psi = random_state(8, 1)
    rep = alt_estimator_variance(psi, H, 0.0)
    assert set(rep.support_profile.values()) == {1}
    assert abs(rep.exact_var - (1 - abs(rep.l_a_exact) ** 2)) < 1e-10


def test_alt_variance_block_toy():
    H = block_toy(4)
    psi = random_state(4, 4)
    rep = alt_estimator_variance(psi, H, 1.3)
    assert set(rep.support_profile.values()) == {2}
    expected = 2 - abs(rep.l_a_exact) ** 2
    assert abs(rep.predicted_var - expected) < 1e-10
    assert abs(rep.exact_var - expected) < 1e-10


def test_alt_variance_dense_toy_full_support():
    H = dense_toy(8, 2)
    psi = random_state(8, 2)
    rep = alt_estimator_variance(psi, H, 2.1)
    assert set(rep.support_profile.values()) == {8}
    expected = 8 - abs(rep.l_a_exact) ** 2
    assert abs(rep.exact_var - expected) < 1e-10
    assert rep.bound == pytest.approx(expected)


@pytest.mark.parametrize("t", [0.0, 0.7, 5.0, 40.0])
def test_alt_estimator_unbiased_h2(t):
    _, H, _, _ = _h2()
    rep = alt_estimator_variance(random_state(4, 21), H, t)
    assert abs(rep.mean_exact - rep.l_a_exact) < 1e-12


def test_alt_estimator_unbiased_hcl():
    _, _, H, _, _, psi_A, _ = system("hcl_sto6g", "+9 -7")
    H = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
    rep = alt_estimator_variance(psi_A.amps, H, 3.0)
    assert abs(rep.mean_exact - rep.l_a_exact) < 1e-12
    assert abs(rep.exact_var - rep.predicted_var) < 1e-10


def test_alt_monte_carlo_mean_within_five_sigma():
    _, H, _, _ = _h2()
    n = 1_000_000
    rep = alt_estimator_variance(random_state(4, 13), H, 2.5, n_draws=n, seed=3)
    sigma = np.sqrt(rep.exact_var / n)
    assert abs(rep.empirical_mean - rep.l_a_exact) < 5 * sigma
    assert rep.empirical_var == pytest.approx(rep.exact_var, rel=0.05)


def test_variance_ordering_alt_exceeds_sampling():
    for seed, t in [(0, 1.0), (1, 4.0), (2, 12.0)]:
        H = dense_toy(8, seed)
        psi = random_state(8, seed)
        alt = alt_estimator_variance(psi, H, t)
        samp = sampling_strategy_variance(psi, H, t)
        assert alt.predicted_var >= samp.exact_var
    _, _, H, _, _, psi_A, _ = system("hcl_sto6g", "+9 -7")
    H = H.toarray() if hasattr(H, "toarray") else np.asarray(H)
    for t in (1.0, 5.0):
        alt = alt_estimator_variance(psi_A.amps, H, t)
        samp = sampling_strategy_variance(psi_A.amps, H, t)
        assert max(alt.support_profile.values()) > 1
        assert alt.predicted_var >= samp.exact_var


def test_support_threshold_stability():
    H = block_toy(6)
    psi = random_state(4, 6)
    vals = [alt_estimator_variance(psi, H, 2.0, eps=eps).predicted_var for eps in (1e-14, 1e-12, 1e-10)]
    assert max(vals) - min(vals) < 1e-12
    H = dense_toy(8, 6)
    psi = random_state(8, 6)
    vals = [alt_estimator_variance(psi, H, 2.0, eps=eps).predicted_var for eps in (1e-14, 1e-12, 1e-10)]
    assert max(vals) - min(vals) < 1e-12


def test_alt_variance_size_cap():
    n = ALT_ENUMERATION_CAP + 1
    with pytest.raises(SizeCapError):
        alt_estimator_variance(np.ones(n) / np.sqrt(n), np.eye(n), 1.0)
