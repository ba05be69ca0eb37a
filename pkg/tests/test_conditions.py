import math

import numpy as np
import pytest

from orey.conditions import (LogPower, Power, lambda_sweep, log_ratio_profile, paper_bound,
                             remark_check, remark_constant)
from orey.errors import DomainError, ParameterError
from orey.models import BiFBm, FBm, FBridge, FracOU, SubFBm, incremental_variance


def test_phi_functions():
    assert Power(0.2)(0.01) == pytest.approx(0.01 ** 0.8)
    assert Power(0.2).L(0.01) == pytest.approx(0.01 ** -0.2)
    assert LogPower(1.5)(0.01) == pytest.approx(0.01 * math.log(100) ** 1.5)
    for phi in (Power(0.3), LogPower(2.0)):
        assert 1e-12 * phi.L(1e-12) ** 3 < 1e-6 * phi.L(1e-6) ** 3 < 1e-2 * phi.L(1e-2) ** 3
    with pytest.raises(ParameterError):
        Power(0.34)
    with pytest.raises(ParameterError):
        LogPower(0.0)


def test_subfbm_bound_example():
    rep = lambda_sweep(SubFBm(0.7), phi=Power(0.2), deltas=(0.01,))
    assert rep.lambdas[0] <= 2 ** 0.4 / Power(0.2).L(0.01) ** 0.6
    assert rep.passed


@pytest.mark.parametrize("H", [0.2, 0.5, 0.8])
def test_fbm_lambda_zero(H):
    rep = lambda_sweep(FBm(H))
    assert np.all(rep.lambdas == 0) and rep.passed


@pytest.mark.parametrize("spec", [SubFBm(0.7), BiFBm(0.8, 0.5), FBridge(0.6), FBridge(0.3)],
                         ids=lambda s: repr(s))
def test_lambda_trend(spec):
    rep = lambda_sweep(spec, deltas=(0.04, 0.02, 0.01, 0.005, 0.0025))
    assert np.all(np.diff(rep.lambdas) <= 0)
    assert np.all(rep.lambdas >= 0)


def test_bridge_bound_constant():
    # the pinning term has derivative 2H((t+h)^(2H-1) + (T-t-h)^(2H-1)), a sum,
    # so the H^2 constant is too small and 4H^2 is needed
    spec, d = FBridge(0.6), 0.04
    t = np.linspace(Power(0.2)(d), 1 - d, 2001)
    dev = np.max(np.abs(incremental_variance(spec, t, t + d) / d ** 1.2 - 1))
    assert dev > paper_bound(spec, Power(0.2), d)
    assert dev <= paper_bound(spec, Power(0.2), d, corrected=True)
    assert lambda_sweep(spec, corrected=True).passed


def test_frac_ou_sweep_small_grid():
    rep = lambda_sweep(FracOU(0.6), t_points=16, h_points=16, deltas=(0.04, 0.02))
    assert rep.passed and rep.lambdas[1] < rep.lambdas[0]


def test_sweep_domain():
    with pytest.raises(DomainError):
        lambda_sweep(SubFBm(0.7), deltas=(0.3,))
    with pytest.raises(ParameterError):
        lambda_sweep(SubFBm(0.7), t_points=8)
    with pytest.raises(DomainError):
        lambda_sweep(FBridge(0.6), T=2.0)


def test_remark():
    assert remark_constant(0.75) == pytest.approx(0.75 * 0.5 * (2 ** 0.5 - 1) * 3 ** -0.5)
    rep = remark_check(0.75)
    assert rep.passed and np.all(rep.sups >= rep.constant)
    with pytest.raises(DomainError):
        remark_check(0.5)
    # away from the origin the sup does vanish
    assert lambda_sweep(SubFBm(0.75), deltas=(0.04, 0.0025)).lambdas[1] < rep.sups.min()


def test_log_ratio_profiles():
    h = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    fbm = log_ratio_profile(FBm(0.35), h_grid=h)
    for curve in (fbm.sup_curve, fbm.inf_curve, fbm.origin_curve):
        assert np.allclose(curve, 0.35, atol=1e-12)
    sub = log_ratio_profile(SubFBm(0.3), h_grid=h)
    assert np.allclose(sub.origin_curve, 0.3 + np.log(2 - 2 ** -0.4) / (2 * np.log(h)), atol=1e-12)
    bi = log_ratio_profile(BiFBm(0.8, 0.5), h_grid=h)
    last = [bi.sup_curve[-1], bi.inf_curve[-1], bi.origin_curve[-1]]
    assert np.all(np.abs(np.array(last) - 0.4) <= 0.02)
    with pytest.raises(DomainError):
        log_ratio_profile(FBm(0.5), h_grid=(1.0,))


def test_csv_outputs():
    text = lambda_sweep(SubFBm(0.7)).to_csv(comment="x")
    assert text.splitlines()[1] == "delta,lambda,paper_bound,pass"
    text = log_ratio_profile(FBm(0.5)).to_csv()
    assert text.splitlines()[0] == "h,sup,inf,origin"
