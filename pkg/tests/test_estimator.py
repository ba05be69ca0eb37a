import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orey.errors import DegeneratePathError, NestingError, ScaleSeparationError
from orey.estimator import (estimate_from_variations, mc_study, orey_estimate, sandwich,
                            summarize)
from orey.models import BiFBm, FBm, FracOU
from orey.partition import make_perturbed, make_regular, subsample
from orey.sampler import Path, sample, sample_frac_ou


@given(st.floats(0.01, 0.99), st.floats(1e-6, 1e3), st.sampled_from([1 / 8, 1 / 64, 1 / 1024]))
def test_synthetic_scaling_law(gamma, A, m):
    est = estimate_from_variations(A * m ** (2 * gamma + 1), A * (m / 2) ** (2 * gamma + 1), m / 2, m)
    assert math.isclose(est.gamma_hat, gamma, abs_tol=1e-12)
    assert est.log_scale < 0


def test_errors():
    fine = make_regular(16)
    path = Path(fine, np.random.default_rng(0).standard_normal(17).cumsum())
    with pytest.raises(NestingError):
        orey_estimate(path, make_regular(5), fine)
    with pytest.raises(NestingError):
        orey_estimate(path, fine, subsample(fine, 2))
    with pytest.raises(DegeneratePathError):
        orey_estimate(Path(fine, 3 * fine.times), subsample(fine, 2), fine)
    # under proper nesting m_coarse >= 2 p_fine, so only raw inputs can collide
    with pytest.raises(ScaleSeparationError):
        estimate_from_variations(1.0, 2.0, 0.1, 0.1)


def test_invariances():
    rng = np.random.default_rng(2)
    fine = make_regular(256)
    coarse = subsample(fine, 2)
    for r in range(100):
        x = sample(FBm(rng.uniform(0.1, 0.9)), fine, r).values
        a, b, c = rng.uniform(0.1, 10), rng.normal(), rng.normal()
        g0 = orey_estimate(Path(fine, x), coarse).gamma_hat
        assert orey_estimate(Path(fine, a * x + b + c * fine.times), coarse).gamma_hat == pytest.approx(g0, abs=1e-12)


def test_frac_ou_mean_removed():
    fine = make_regular(128)
    path = sample_frac_ou(FracOU(0.6, x0=5.0), fine, 3)
    centered = Path(fine, path.centered().values)
    coarse = subsample(fine, 2)
    assert orey_estimate(path, coarse).gamma_hat == orey_estimate(centered, coarse).gamma_hat


def test_sandwich_regular_pairs():
    fine = make_regular(512)
    coarse = subsample(fine, 4)
    for r in range(20):
        path = sample(FBm(0.7), fine, r)
        lo, mid, hi = sandwich(path, coarse, fine, 0.7)
        assert lo * (1 - 1e-12) <= mid <= hi * (1 + 1e-12)


def test_sandwich_irregular_pairs():
    fine = make_perturbed(512, 1.0, 1.5, seed=1)
    coarse = subsample(fine, 2)
    for r in range(20):
        path = sample(FBm(0.4), fine, r)
        lo, mid, hi = sandwich(path, coarse, fine, 0.4)
        assert lo <= hi and np.isfinite(mid)


def test_summary_identity():
    x = np.random.default_rng(5).normal(0.4, 0.05, 37)
    mean, std, bias, rmse = summarize(x, 0.41)
    R = x.size
    assert rmse ** 2 == pytest.approx(bias ** 2 + std ** 2 * (R - 1) / R, abs=1e-12)


def test_mc_reproducible(tmp_path):
    a = mc_study(BiFBm(0.8, 0.5), 512, replicas=10, seed=4)
    b = mc_study(BiFBm(0.8, 0.5), 512, replicas=10, seed=4)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
    assert a.effective == 10 and not a.failures
    assert a.rmse ** 2 == pytest.approx(a.bias ** 2 + a.std ** 2 * 9 / 10, abs=1e-12)
    doc = json.loads(a.to_json(tmp_path / "s.json"))
    assert doc["spec"]["family"] == "bifbm"
    assert a.to_csv(tmp_path / "r.csv").splitlines()[0] == "replica,gamma_hat,v_coarse,v_fine"


def test_mc_brownian_mean():
    s = mc_study(FBm(0.5), 4096, replicas=200, seed=1)
    assert 0.48 <= s.mean <= 0.52


def test_mc_bias_shrinks_fbm():
    small = mc_study(FBm(0.3), 1024, replicas=200, seed=8)
    big = mc_study(FBm(0.3), 4096, replicas=200, seed=8)
    assert big.rmse < small.rmse
    assert abs(big.mean - 0.3) <= 0.03


def test_mc_bifbm_mean():
    s = mc_study(BiFBm(0.8, 0.5), 4096, replicas=200, seed=2)
    assert abs(s.mean - 0.4) <= 0.05
