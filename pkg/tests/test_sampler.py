import numpy as np
import pytest
from scipy import stats

from orey.errors import DomainError, NumericalPSDError
from orey.models import BiFBm, FBm, FBridge, FracOU, SubFBm, covariance_matrix, incremental_variance
from orey.partition import Partition, make_regular
from orey.sampler import (SeedPolicy, cholesky_with_jitter, sample, sample_bridge,
                          sample_ensemble, sample_exact, sample_fbm_fast, sample_frac_ou)


def z_scores(values, cov):
    """Entrywise (empirical - true) / standard error for centered Gaussian rows."""
    R = values.shape[0]
    emp = values.T @ values / R
    var = np.diag(cov)
    se = np.sqrt((cov ** 2 + np.outer(var, var)) / R)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(se > 0, (emp - cov) / se, 0.0)
    return z, emp


def test_brownian_covariance():
    p = Partition([0, 0.5, 1.0, 1.5])
    vals = sample_ensemble(FBm(0.5), p, 10_000, 1, route=sample_exact)[:, :3]
    z, emp = z_scores(vals, np.array([[0, 0, 0], [0, 0.5, 0.5], [0, 0.5, 1.0]]))
    assert np.abs(z).max() < 4
    assert np.all(emp[0] == 0)


def test_subfbm_increment_variance():
    p = make_regular(8)
    vals = sample_ensemble(SubFBm(0.3), p, 10_000, 2)
    inc = vals[:, 5] - vals[:, 2]
    truth = incremental_variance(SubFBm(0.3), p.times[2], p.times[5])
    se = truth * np.sqrt(2 / inc.size)
    assert abs(np.mean(inc ** 2) - truth) < 4 * se


def test_fast_fbm_brownian_increments():
    path = sample_fbm_fast(0.5, 10_000, 1.0, 5)
    inc = np.diff(path.values)
    assert stats.kstest(inc / np.sqrt(1e-4), "norm").pvalue > 1e-3


def test_fast_fbm_marginal_and_against_exact():
    H, N = 0.3, 8
    p = make_regular(N, 2.0)
    fast = sample_ensemble(FBm(H), p, 10_000, 3, route=lambda s, q, seed: sample_fbm_fast(H, N, 2.0, seed))
    exact = sample_ensemble(FBm(H), p, 10_000, 4, route=sample_exact)
    xt = fast[:, -1]
    assert abs(np.mean(xt ** 2) - 2 ** (2 * H)) < 4 * 2 ** (2 * H) * np.sqrt(2 / xt.size)
    a, b = fast[:, 1:], exact[:, 1:]
    ca, cb = a.T @ a / a.shape[0], b.T @ b / b.shape[0]
    cov = covariance_matrix(FBm(H), p.times[1:])
    var = np.diag(cov)
    pooled = np.sqrt(2 * (cov ** 2 + np.outer(var, var)) / a.shape[0])
    assert np.abs((ca - cb) / pooled).max() < 4


def test_seed_reproducibility_and_independence():
    p = make_regular(64)
    for spec in (FBm(0.7), SubFBm(0.4), FracOU(0.6), FBridge(0.3)):
        a = sample(spec, p, SeedPolicy(9, 2)).values
        b = sample(spec, p, SeedPolicy(9, 2)).values
        c = sample(spec, p, SeedPolicy(9, 3)).values
        assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_ensemble_independent_of_threads():
    p = make_regular(128)
    one = sample_ensemble(BiFBm(0.7, 0.6), p, 12, 5, workers=1)
    many = sample_ensemble(BiFBm(0.7, 0.6), p, 12, 5, workers=3)
    tail = sample_ensemble(BiFBm(0.7, 0.6), p, 4, 5, first_replica=8)
    assert np.array_equal(one, many) and np.array_equal(one[8:], tail)


def test_start_is_zero():
    p = make_regular(32)
    for spec in (FBm(0.3), SubFBm(0.7), BiFBm(0.8, 0.5), FracOU(0.6), FBridge(0.6)):
        assert sample(spec, p, 1).values[0] == 0.0


def test_frac_ou_limits():
    p = make_regular(50, 2.0)
    path = sample_frac_ou(FracOU(0.6, mu=0.8, theta=1e-12, x0=2.0), p, 1)
    assert np.allclose(path.values, 2.0 * np.exp(-0.8 * p.times), rtol=0, atol=1e-10)
    drift = sample_frac_ou(FracOU(0.6, mu=1e-12, theta=1.7), p, 4)
    assert np.allclose(drift.values, 1.7 * drift.driver, rtol=0, atol=1e-10)


def test_frac_ou_centering():
    p = make_regular(20)
    spec = FracOU(0.4, x0=3.0)
    raw = sample_frac_ou(spec, p, 2)
    assert np.allclose(raw.centered().values, sample(spec, p, 2).values)
    assert np.allclose(raw.values - raw.centered().values, 3.0 * np.exp(-p.times))


def test_frac_ou_stationary_variance():
    # classical OU: Var X_t -> theta^2 / (2 mu)
    spec = FracOU(0.5, mu=1.0, theta=1.0, refine_factor=16)
    p = Partition([0.0, 3.0, 6.0, 10.0])
    vals = sample_ensemble(spec, p, 10_000, 6)
    v = np.mean(vals[:, -1] ** 2)
    assert abs(v - 0.5) < 4 * 0.5 * np.sqrt(2 / 10_000) + 2e-3


def test_bridge_pinning_and_brownian_bridge():
    p = make_regular(8, 2.0)
    vals = sample_ensemble(FBridge(0.5, horizon=2.0), p, 10_000, 7)
    assert np.all(vals[:, -1] == 0) and np.all(vals[:, 0] == 0)
    sub = vals[:, [2, 4]]
    s, t = np.array([0.5, 1.0]), 2.0
    kern = np.minimum(s[:, None], s[None, :]) * (1 - np.maximum(s[:, None], s[None, :]) / t)
    z, _ = z_scores(sub, kern)
    assert np.abs(z).max() < 4
    with pytest.raises(DomainError):
        sample_bridge(FBridge(0.5, horizon=2.0), make_regular(8, 1.0), 1)


def test_cholesky_jitter_and_failure():
    C = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-15]])
    L, jitter = cholesky_with_jitter(C)
    assert jitter > 0 and np.allclose(L @ L.T, C, atol=1e-9)
    with pytest.raises(NumericalPSDError) as err:
        cholesky_with_jitter(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.pivot == 2
