import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mqcaviar.inference as inference
from conftest import stable_params
from mqcaviar import CaviarParams, GdConfig, bootstrap_cov, chi2_sf, fit_model, gd_optimize, spillover_suite, wald_test
from mqcaviar.exceptions import CovarianceUnreliableError, DomainError, ShapeError, ValidationError
from mqcaviar.inference import SPILLOVER_HYPOTHESES, block_bootstrap_indices, default_block_len, draws_covariance
from mqcaviar.optimize import init_from_qr

# ---------------------------------------------------------------- chi-square


def test_chi2_sf_examples():
    for df in (1, 2, 4, 10):
        assert chi2_sf(0.0, df) == 1.0
    assert chi2_sf(2.0, 2) == pytest.approx(math.exp(-1.0), abs=1e-12)
    assert chi2_sf(3.4171, 4) == pytest.approx(0.4906, abs=5e-4)
    assert chi2_sf(34.3529, 4) < 1e-4


def test_chi2_sf_df2_closed_form():
    x = np.round(np.arange(0.1, 50.0001, 0.1), 10)
    ours = np.array([chi2_sf(v, 2) for v in x])
    np.testing.assert_allclose(ours, np.exp(-x / 2), rtol=0, atol=1e-10)


def test_chi2_sf_df1_is_normal_tail():
    # W = z^2 with one restriction, so the p-value is 2 (1 - Phi(2)) for z = 2
    assert chi2_sf(4.0, 1) == pytest.approx(math.erfc(2 / math.sqrt(2)), abs=1e-12)


@given(st.floats(0.0, 200.0), st.floats(1e-3, 10.0), st.integers(1, 12))
def test_chi2_sf_decreasing(x, dx, df):
    a, b = chi2_sf(x, df), chi2_sf(x + dx, df)
    assert 0.0 <= b <= a <= 1.0
    if 1e-300 < b and a < 1.0 - 1e-12:
        assert b < a


def test_chi2_sf_domain():
    with pytest.raises(DomainError):
        chi2_sf(-1.0, 2)
    with pytest.raises(DomainError):
        chi2_sf(np.inf, 2)
    with pytest.raises(DomainError):
        chi2_sf(1.0, 0)


# ---------------------------------------------------------------- Wald


def test_wald_null_exact():
    res = wald_test(np.zeros(3), np.eye(3), [0, 2])
    assert res.statistic == 0.0 and res.pvalue == 1.0 and res.decision == "accept"
    assert res.df == 2


def test_wald_scalar():
    res = wald_test([2.0], [[1.0]], [0])
    assert res.statistic == pytest.approx(4.0)
    assert res.pvalue == pytest.approx(0.0455, abs=5e-5)
    assert res.rejected


def test_wald_permutation_and_rescaling_invariance(rng):
    theta = rng.normal(size=5)
    M = rng.normal(size=(5, 5))
    V = M @ M.T + 0.1 * np.eye(5)
    base = wald_test(theta, V, [1, 3, 4]).statistic
    assert wald_test(theta, V, [4, 1, 3]).statistic == pytest.approx(base, rel=1e-12)
    # rescale the unrestricted parameter 0 and its covariance row/column
    D = np.diag([7.5, 1, 1, 1, 1])
    assert wald_test(D @ theta, D @ V @ D, [1, 3, 4]).statistic == pytest.approx(base, rel=1e-12)


def test_wald_singular_uses_pinv():
    V = np.zeros((2, 2))
    V[0, 0] = 1.0
    with pytest.warns(RuntimeWarning):
        res = wald_test([1.0, 0.0], V, [0, 1])
    assert res.pinv_used and res.statistic == pytest.approx(1.0)


def test_wald_validation():
    with pytest.raises(ShapeError):
        wald_test(np.zeros(3), np.eye(2), [0])
    with pytest.raises(ValidationError):
        wald_test(np.zeros(3), np.eye(3), [])
    with pytest.raises(ValidationError):
        wald_test(np.zeros(3), np.eye(3), [0, 0])


def test_suite_shape_and_zero_offdiagonals():
    p = CaviarParams(0.05, [-0.5, -0.4], np.diag([-0.2, -0.1]), np.diag([0.8, 0.6]))
    fit = type("Fit", (), {"params": p, "cov": np.eye(10)})()
    tests = spillover_suite(fit)
    assert [t.df for t in tests] == [4, 2, 2]
    assert [t.hypothesis for t in tests] == [h[0] for h in SPILLOVER_HYPOTHESES]
    assert all(t.decision == "accept" and t.statistic == 0.0 for t in tests)
    assert tests[2].restriction == (3, 7)


def test_suite_needs_two_markets():
    p = CaviarParams.zeros(0.05, 3)
    with pytest.raises(ValidationError):
        spillover_suite(type("Fit", (), {"params": p, "cov": np.eye(21)})())


# ---------------------------------------------------------------- bootstrap


def test_block_indices():
    rng = np.random.default_rng(0)
    idx = block_bootstrap_indices(100, 7, rng)
    assert idx.shape == (100,) and idx.min() >= 0 and idx.max() < 100
    runs = np.diff(idx[:7])
    assert np.all(runs == 1)
    assert default_block_len(5000) == 18


@pytest.fixture(scope="module")
def small_fit():
    from mqcaviar import SimConfig, simulate

    panel, _ = simulate(SimConfig(stable_params(), 800, seed=2))
    params, _ = gd_optimize(panel, init_from_qr(panel, 0.05), record_time=False)
    return panel, params


def test_single_replicate_degenerate(small_fit):
    panel, params = small_fit
    cov = bootstrap_cov(panel, params, replicates=1, seed=0)
    np.testing.assert_array_equal(cov.covariance, 0.0)
    assert not cov.reliable and cov.replicates == 1


def test_cov_symmetric_psd(small_fit):
    panel, params = small_fit
    cov = bootstrap_cov(panel, params, replicates=30, seed=1, refit_max_iter=10)
    V = cov.covariance
    assert np.allclose(V, V.T, atol=1e-10)
    assert np.all(np.diag(V) >= 0)
    assert not cov.reliable  # fewer than 50 replicates
    assert cov.block_len == default_block_len(800)


def test_bootstrap_independent_of_jobs(small_fit):
    panel, params = small_fit
    a = bootstrap_cov(panel, params, replicates=6, seed=3, refit_max_iter=5, method="sample")
    b = bootstrap_cov(panel, params, replicates=6, seed=3, refit_max_iter=5, method="sample", n_jobs=2)
    np.testing.assert_array_equal(a.covariance, b.covariance)


def test_too_many_failures(small_fit, monkeypatch):
    panel, params = small_fit
    calls = iter(range(1000))
    monkeypatch.setattr(inference, "_refit", lambda *a: None if next(calls) % 3 == 0 else params.to_vector())
    with pytest.raises(CovarianceUnreliableError) as info:
        bootstrap_cov(panel, params, replicates=10)
    assert info.value.estimate.failed == 4


def test_draws_covariance_handles_frozen_columns(rng):
    draws = np.column_stack([rng.normal(size=300), np.zeros(300), 2 * rng.normal(size=300)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        V = draws_covariance(draws)
    assert V[1].tolist() == [0.0, 0.0, 0.0]
    assert np.sqrt(V[2, 2]) == pytest.approx(2.0, rel=0.15)
    S = draws_covariance(draws, method="sample")
    assert S[0, 0] == pytest.approx(np.var(draws[:, 0], ddof=1))
    with pytest.raises(ValidationError):
        draws_covariance(draws, method="huber")


def test_robust_cov_ignores_wild_draws(rng):
    draws = rng.normal(size=(400, 2))
    wild = draws.copy()
    wild[:8] += 50.0
    V = draws_covariance(wild)
    np.testing.assert_allclose(np.sqrt(np.diag(V)), 1.0, rtol=0.15)


def test_intercept_only_se_matches_monte_carlo():
    k, T = 0.1, 1000
    free = np.array([True, False, False])
    cfg = GdConfig(max_iter=50)

    def fit(y):
        p, _ = gd_optimize(y, init_from_qr(y, k), cfg, free=free, validate=False, record_time=False)
        return p

    rng = np.random.default_rng(0)
    mc_se = np.std([fit(rng.standard_normal((T, 1))).c[0] for _ in range(200)], ddof=1)
    y = np.random.default_rng(100).standard_normal((T, 1))
    boot = bootstrap_cov(y, fit(y), cfg, replicates=200, block_len=1, seed=0, free=free)
    assert 0.7 * mc_se <= boot.standard_errors[0] <= 1.3 * mc_se
    assert np.all(boot.standard_errors[1:] == 0.0)


def test_bootstrap_se_stable_when_doubling(sim_3000):
    _, panel, _ = sim_3000
    fit = fit_model(panel, 0.05, n_bootstrap=0, record_time=False)
    a = bootstrap_cov(panel, fit.params, replicates=200, seed=1).standard_errors
    b = bootstrap_cov(panel, fit.params, replicates=400, seed=2).standard_errors
    assert np.max(np.abs(b / a - 1)) < 0.15
