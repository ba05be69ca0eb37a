"""Numerical checks of the Orey-index conditions on a (t, h) grid.

Grid maxima under-estimate suprema, so every "value <= bound" check here
is one-sided and sound; "value >= constant" checks carry an explicit
tolerance factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .models import (BiFBm, FBm, FBridge, FracOU, SubFBm, covariance_matrix,
                     incremental_variance, orey_profile, _pow)

REMARK_TOLERANCE = 0.05
ROUNDOFF = 1e-9


@dataclass(frozen=True)
class LogPower:
    """phi(h) = h |ln h|^alpha."""

    alpha: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterError(f"LogPower needs alpha > 0, got {self.alpha!r}")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return h * np.abs(np.log(h)) ** self.alpha

    def L(self, h):
        return np.abs(np.log(np.asarray(h, dtype=float))) ** self.alpha


@dataclass(frozen=True)
class Power:
    """phi(h) = h^(1 - beta); h L(h)^3 -> 0 requires beta < 1/3."""

    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and 0 < self.beta < 1 / 3):
            raise ParameterError(f"Power needs 0 < beta < 1/3, got {self.beta!r}")

    def __call__(self, h):
        return np.asarray(h, dtype=float) ** (1 - self.beta)

    def L(self, h):
        return np.asarray(h, dtype=float) ** (-self.beta)


def _horizon(spec, T):
    if isinstance(spec, FBridge):
        if T is not None and not math.isclose(T, spec.horizon, rel_tol=1e-12):
            raise DomainError("T must equal the bridge horizon")
        return spec.horizon
    return 1.0 if T is None else float(T)


def _sigma2_rows(spec, starts, lags):
    """sigma^2(s, s + h) for every s in ``starts`` (rows) and h in ``lags`` (cols)."""
    starts, lags = np.asarray(starts, float), np.asarray(lags, float)
    if not isinstance(spec, FracOU):
        return incremental_variance(spec, starts[:, None], starts[:, None] + lags[None, :])
    # kernel fallback: one quadrature grid per start point
    out = np.empty((starts.size, lags.size))
    for i, s in enumerate(starts):
        pts = np.concatenate([[s], s + lags])
        cov = covariance_matrix(spec, pts)
        out[i] = np.maximum(cov[0, 0] + np.diag(cov)[1:] - 2 * cov[0, 1:], 0.0)
    return out


def paper_bound(spec, phi, delta, T=1.0, corrected=False):
    """Closed-form upper bound on Lambda(delta) for each family.

    For the bridge with H >= 1/2 the printed constant is H^2; the derivative
    of the pinning term is 2H((t+h)^(2H-1) + (T-t-h)^(2H-1)), a sum rather
    than a difference, so a valid constant is 4H^2.  ``corrected=True``
    returns that value.
    """
    H = spec.H
    if isinstance(spec, FBm):
        return 0.0
    if isinstance(spec, SubFBm):
        return 2.0 ** (2 * H - 1) / phi.L(delta) ** (2 - 2 * H)
    if isinstance(spec, BiFBm):
        return 8.0 / phi.L(delta) ** (2 - 2 * H * spec.K)
    if isinstance(spec, FBridge):
        T = spec.horizon
        if H < 0.5:
            return T ** (-2 * H) * delta ** (2 * H)
        const = 4 * H * H if corrected else H * H
        return const * T ** (2 * H - 2) * delta ** (2 - 2 * H)
    if isinstance(spec, FracOU):
        mu, theta = spec.mu, spec.theta
        sup_var = 2 * spec.x0 ** 2 + 4 * theta ** 2 * math.exp(2 * mu * T) * T ** (2 * H) * (1 + mu * mu * T * T)
        return theta ** -2 * delta ** (1 - H) * (delta ** (1 - H) * mu * mu * sup_var
                                                  + 2 * mu * theta * math.sqrt(sup_var))
    raise ParameterError(f"unknown process spec {spec!r}")


@dataclass
class SweepReport:
    deltas: np.ndarray
    lambdas: np.ndarray
    bounds: np.ndarray
    passes: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.passes))

    def to_csv(self, file=None, comment=None):
        lines = [f"# {ln}" for ln in str(comment).splitlines()] if comment else []
        lines.append("delta,lambda,paper_bound,pass")
        lines += [f"{d:.17g},{v:.17g},{b:.17g},{int(ok)}"
                  for d, v, b, ok in zip(self.deltas, self.lambdas, self.bounds, self.passes)]
        return _emit(lines, file)


def _emit(lines, file):
    text = "\n".join(lines) + "\n"
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text)
    return text


def lambda_sweep(spec, profile=None, phi=None, deltas=(0.04, 0.02, 0.01, 0.005),
                 t_points=64, h_points=64, T=None, corrected=False):
    """Grid approximation of Lambda(delta) = sup |sigma(t,t+h) / (kappa h^gamma) - 1|.

    t ranges geometrically over [phi(delta), T - delta] and h over
    (delta 1e-4, delta]; both endpoints are included.
    """
    profile = orey_profile(spec) if profile is None else profile
    phi = Power(0.2) if phi is None else phi
    T = _horizon(spec, T)
    if t_points < 16 or h_points < 16:
        raise ParameterError("grid resolutions must be at least 16")
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    if np.any(deltas <= 0) or np.any(deltas > T / 4) or np.any(np.diff(deltas) >= 0):
        raise DomainError("deltas must be distinct values in (0, T/4]")
    lams, bounds = [], []
    for delta in deltas:
        lo, hi = float(phi(delta)), T - delta
        if not lo < hi:
            raise DomainError(f"phi(delta) = {lo:g} exceeds T - delta at delta = {delta:g}")
        ts = np.geomspace(lo, hi, t_points)
        hs = np.geomspace(delta * 1e-4, delta, h_points)
        sigma = np.sqrt(_sigma2_rows(spec, ts, hs))
        ratio = sigma / (profile.kappa * hs[None, :] ** profile.gamma)
        lams.append(float(np.max(np.abs(ratio - 1.0))))
        bounds.append(float(paper_bound(spec, phi, delta, T, corrected)))
    lams, bounds = np.array(lams), np.array(bounds)
    # sqrt and power round-off leaves ~1e-11 where the ratio is exactly 1
    lams = np.where(lams < ROUNDOFF, 0.0, lams)
    return SweepReport(deltas, lams, bounds, lams <= bounds)


@dataclass
class RemarkReport:
    H: float
    deltas: np.ndarray
    sups: np.ndarray
    constant: float
    passes: np.ndarray

    @property
    def passed(self):
        return bool(np.all(self.passes))


def remark_constant(H):
    return H * (2 * H - 1) * (2 ** (2 * H - 1) - 1) * 3 ** (2 * H - 2)


def remark_check(H, deltas=(0.1, 0.05, 0.01, 0.005, 0.001), T=1.0, s_points=64, h_points=64):
    """sup over s in [delta, T - delta], h in (0, delta] of |h^(-2H) f_s(h)| for sfBm.

    f_s(h) = (2s + h)^(2H) - 2^(2H-1) (s^(2H) + (s+h)^(2H)).  The sup must
    stay above ``(1 - 0.05) * remark_constant(H)`` for every delta: without
    the boundary layer phi the deviation does not vanish.
    """
    if not 0.5 < H < 1:
        raise DomainError(f"remark_check needs 1/2 < H < 1, got {H!r}")
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0) or np.any(deltas >= T / 2):
        raise DomainError("deltas must lie in (0, T/2)")
    twoH = 2 * H
    sups = []
    for delta in deltas:
        s = np.geomspace(delta, T - delta, s_points)[:, None]
        h = np.geomspace(delta * 1e-3, delta, h_points)[None, :]
        f = _pow(2 * s + h, twoH) - 2 ** (twoH - 1) * (_pow(s, twoH) + _pow(s + h, twoH))
        sups.append(float(np.max(np.abs(f) / h ** twoH)))
    sups = np.array(sups)
    const = remark_constant(H)
    return RemarkReport(H, deltas, sups, const, sups >= (1 - REMARK_TOLERANCE) * const)


@dataclass
class LogRatioProfile:
    h: np.ndarray
    sup_curve: np.ndarray
    inf_curve: np.ndarray
    origin_curve: np.ndarray

    def to_csv(self, file=None, comment=None):
        lines = [f"# {ln}" for ln in str(comment).splitlines()] if comment else []
        lines.append("h,sup,inf,origin")
        lines += [f"{a:.17g},{b:.17g},{c:.17g},{d:.17g}" for a, b, c, d in
                  zip(self.h, self.sup_curve, self.inf_curve, self.origin_curve)]
        return _emit(lines, file)


def log_ratio_profile(spec, phi=None, h_grid=(1e-1, 1e-2, 1e-3, 1e-4), s_points=64, T=None):
    """ln sigma(s, s+h) / ln h: sup and inf over s in [phi(h), T - h], and at s = 0."""
    phi = Power(0.2) if phi is None else phi
    T = _horizon(spec, T)
    h_grid = np.asarray(h_grid, dtype=float)
    if np.any(h_grid <= 0) or np.any(h_grid >= 1):
        raise DomainError("log-ratio profiles need 0 < h < 1")
    sups, infs, origins = [], [], []
    for h in h_grid:
        lo, hi = float(phi(h)), T - h
        origin = 0.5 * math.log(float(_sigma2_rows(spec, [0.0], [h])[0, 0])) / math.log(h)
        origins.append(origin)
        if not lo < hi:
            sups.append(np.nan)
            infs.append(np.nan)
            continue
        s = np.geomspace(lo, hi, s_points)
        if isinstance(spec, FracOU):
            sig2 = np.array([_sigma2_rows(spec, [si], [h])[0, 0] for si in s])
        else:
            sig2 = _sigma2_rows(spec, s, [h])[:, 0]
        ratio = 0.5 * np.log(sig2) / math.log(h)
        sups.append(float(ratio.max()))
        infs.append(float(ratio.min()))
    return LogRatioProfile(h_grid, np.array(sups), np.array(infs), np.array(origins))
