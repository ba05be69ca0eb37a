"""Covariance kernels and Orey profiles of the supported Gaussian families.

Five centered Gaussian processes are supported:

    FBm(H)              fractional Brownian motion
    SubFBm(H)           sub-fractional Brownian motion
    BiFBm(H, K)         bifractional Brownian motion
    FracOU(H, mu, ...)  fractional Ornstein-Uhlenbeck process of the first kind
    FBridge(H, horizon) fractional Brownian bridge pinned at ``horizon``

All kernels accept scalars or broadcastable arrays.  The fractional
Ornstein-Uhlenbeck kernel has no closed form; it is computed from the
explicit solution written through the driving fBm,

    X_t - x0 exp(-mu t) = theta (B_t - mu int_0^t exp(-mu (t-u)) B_u du),

with the integral replaced by the trapezoid rule on a grid ``refine_factor``
times finer than the requested times.  The sampler applies the very same
linear map to a simulated fBm, so kernel and sampler describe one law.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Union

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, NotAvailableError, ParameterError

_TINY = 1e-300


def _check_unit(name, value, upper_closed=False):
    ok = 0.0 < value <= 1.0 if upper_closed else 0.0 < value < 1.0
    if not (np.isfinite(value) and ok):
        interval = "(0, 1]" if upper_closed else "(0, 1)"
        raise ParameterError(f"{name} must lie in {interval}, got {value!r}")


def _check_positive(name, value):
    if not (np.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class FBm:
    H: float

    def __post_init__(self):
        _check_unit("H", self.H)


@dataclass(frozen=True)
class SubFBm:
    H: float

    def __post_init__(self):
        _check_unit("H", self.H)


@dataclass(frozen=True)
class BiFBm:
    H: float
    K: float = 1.0

    def __post_init__(self):
        _check_unit("H", self.H)
        _check_unit("K", self.K, upper_closed=True)


@dataclass(frozen=True)
class FracOU:
    H: float
    mu: float = 1.0
    theta: float = 1.0
    x0: float = 0.0
    refine_factor: int = 8

    def __post_init__(self):
        _check_unit("H", self.H)
        _check_positive("mu", self.mu)
        _check_positive("theta", self.theta)
        if not np.isfinite(self.x0):
            raise ParameterError(f"x0 must be finite, got {self.x0!r}")
        if int(self.refine_factor) != self.refine_factor or self.refine_factor < 1:
            raise ParameterError(
                f"refine_factor must be a positive integer, got {self.refine_factor!r}")


@dataclass(frozen=True)
class FBridge:
    H: float
    horizon: float = 1.0

    def __post_init__(self):
        _check_unit("H", self.H)
        _check_positive("horizon", self.horizon)


ProcessSpec = Union[FBm, SubFBm, BiFBm, FracOU, FBridge]

FAMILIES = {"fbm": FBm, "subfbm": SubFBm, "bifbm": BiFBm, "fou": FracOU, "bridge": FBridge}
_NAMES = {cls: name for name, cls in FAMILIES.items()}


def family_name(spec):
    try:
        return _NAMES[type(spec)]
    except KeyError:
        raise ParameterError(f"unknown process spec {spec!r}") from None


def spec_to_dict(spec):
    """Serialise a spec as ``{"family": name, **params}``."""
    return {"family": family_name(spec), **asdict(spec)}


def spec_from_dict(data):
    data = dict(data)
    try:
        cls = FAMILIES[data.pop("family")]
    except KeyError as exc:
        raise ParameterError(f"unknown or missing family: {exc}") from None
    try:
        return cls(**data)
    except TypeError as exc:
        raise ParameterError(str(exc)) from None


@dataclass(frozen=True)
class OreyProfile:
    """Orey index ``gamma`` and scale ``kappa``: sigma(t, t+h) ~ kappa h^gamma."""

    gamma: float
    kappa: float

    def __post_init__(self):
        _check_unit("gamma", self.gamma)
        _check_positive("kappa", self.kappa)


def orey_profile(spec):
    if isinstance(spec, (FBm, SubFBm, FBridge)):
        return OreyProfile(spec.H, 1.0)
    if isinstance(spec, BiFBm):
        return OreyProfile(spec.H * spec.K, 2.0 ** ((1.0 - spec.K) / 2.0))
    if isinstance(spec, FracOU):
        return OreyProfile(spec.H, spec.theta)
    raise ParameterError(f"unknown process spec {spec!r}")


def g0_function(spec, t):
    """Limit of E(X_{t+h} - 2X_t + X_{t-h})^2 / h^(2 gamma) away from 0.

    Only exhibited for fBm and sub-fractional Bm, where it is the constant
    ``4 - 2^(2H)``.
    """
    if not isinstance(spec, (FBm, SubFBm)):
        raise NotAvailableError(f"g0 is not available for {family_name(spec)}")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("g0 is defined for t > 0")
    value = 4.0 - 2.0 ** (2.0 * spec.H)
    return value if t.ndim == 0 else np.full(t.shape, value)


def _pow(x, a):
    """``x**a`` for x >= 0 via exp(a log x), with values below 1e-300 sent to 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(x).shape)
    mask = x >= _TINY
    out[mask] = np.exp(a * np.log(x[mask]))
    return out if out.ndim else float(out)


def _check_times(spec, *times):
    arrays = [np.asarray(t, dtype=float) for t in times]
    for a in arrays:
        if np.any(~np.isfinite(a)) or np.any(a < 0):
            raise DomainError("times must be finite and non-negative")
        if isinstance(spec, FBridge) and np.any(a > spec.horizon * (1 + 1e-12)):
            raise DomainError(f"times must not exceed the bridge horizon {spec.horizon}")
    return arrays


def _bridge_pin(spec, t):
    T = spec.horizon
    return _pow(t, 2 * spec.H) + _pow(T, 2 * spec.H) - _pow(np.abs(t - T), 2 * spec.H)


def covariance(spec, s, t):
    """Covariance E[X_s X_t] of the centered process."""
    s, t = _check_times(spec, s, t)
    if isinstance(spec, FracOU):
        return _frac_ou_pairs(spec, s, t)
    twoH = 2 * spec.H
    if isinstance(spec, FBm):
        return 0.5 * (_pow(s, twoH) + _pow(t, twoH) - _pow(np.abs(t - s), twoH))
    if isinstance(spec, SubFBm):
        return (_pow(s, twoH) + _pow(t, twoH)
                - 0.5 * (_pow(s + t, twoH) + _pow(np.abs(s - t), twoH)))
    if isinstance(spec, BiFBm):
        K = spec.K
        return 2.0 ** (-K) * (_pow(_pow(t, twoH) + _pow(s, twoH), K)
                              - _pow(np.abs(t - s), twoH * K))
    if isinstance(spec, FBridge):
        fbm = 0.5 * (_pow(s, twoH) + _pow(t, twoH) - _pow(np.abs(t - s), twoH))
        return fbm - _bridge_pin(spec, s) * _bridge_pin(spec, t) / (4 * _pow(spec.horizon, twoH))
    raise ParameterError(f"unknown process spec {spec!r}")


def incremental_variance(spec, s, t):
    """Incremental variance E[X_t - X_s]^2, in closed form where one exists."""
    s, t = _check_times(spec, s, t)
    if isinstance(spec, FracOU):
        full, si, ti, shape = _frac_ou_grid_for(spec, s, t)
        out = (full[si, si] + full[ti, ti] - 2 * full[si, ti]).reshape(shape)
        out = np.maximum(out, 0.0)
        return out if out.ndim else float(out)
    twoH = 2 * spec.H
    lag = _pow(np.abs(t - s), twoH)
    if isinstance(spec, FBm):
        return lag
    if isinstance(spec, SubFBm):
        return lag + _pow(s + t, twoH) - 2.0 ** (twoH - 1) * (_pow(t, twoH) + _pow(s, twoH))
    if isinstance(spec, BiFBm):
        K = spec.K
        return (2.0 ** (1 - K) * (_pow(np.abs(t - s), twoH * K) - _pow(_pow(t, twoH) + _pow(s, twoH), K))
                + _pow(t, twoH * K) + _pow(s, twoH * K))
    if isinstance(spec, FBridge):
        diff = _bridge_pin(spec, t) - _bridge_pin(spec, s)
        return lag - diff * diff / (4 * _pow(spec.horizon, twoH))
    raise ParameterError(f"unknown process spec {spec!r}")


def covariance_matrix(spec, times):
    """Matrix ``[covariance(t_i, t_j)]`` over a 1-D array of times.

    For FracOU the whole array is one evaluation grid: the quadrature grid
    is refined from the sorted distinct times (plus 0), so entries depend
    on which times are requested together.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise DomainError("times must be a 1-D array")
    (times,) = _check_times(spec, times)
    if isinstance(spec, FracOU):
        grid, index = np.unique(np.concatenate([[0.0], times]), return_inverse=True)
        full = frac_ou_covariance_grid(spec, grid)
        idx = index[1:]
        return full[np.ix_(idx, idx)]
    return covariance(spec, times[:, None], times[None, :])


def _frac_ou_grid_for(spec, s, t):
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    grid, inverse = np.unique(np.concatenate([[0.0], s.ravel(), t.ravel()]), return_inverse=True)
    full = frac_ou_covariance_grid(spec, grid)
    n = s.size
    return full, inverse[1:1 + n], inverse[1 + n:], s.shape


def _frac_ou_pairs(spec, s, t):
    full, si, ti, shape = _frac_ou_grid_for(spec, s, t)
    out = full[si, ti].reshape(shape)
    return out if out.ndim else float(out)


# --- fractional Ornstein-Uhlenbeck machinery shared with the sampler --------

def refine_grid(grid, refine_factor):
    """Split every interval of ``grid`` (starting at 0) into equal sub-steps.

    Returns the refined grid and the indices of the original points in it.
    """
    grid = np.asarray(grid, dtype=float)
    r = int(refine_factor)
    n = grid.size - 1
    if n == 0:
        return grid.copy(), np.array([0])
    frac = np.arange(r) / r
    fine = (grid[:-1, None] + frac[None, :] * np.diff(grid)[:, None]).ravel()
    fine = np.append(fine, grid[-1])
    return fine, np.arange(n + 1) * r


def ou_filter(values, steps, mu, axis=-1):
    """Trapezoid approximation of int_0^t exp(-mu (t-u)) b(u) du along ``axis``.

    ``values[..., k]`` are samples of b on a grid starting at 0 with
    increments ``steps``; b(0) contributes with weight h_1 / 2.  A uniform
    step uses an IIR filter, otherwise an explicit recursion.
    """
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    steps = np.asarray(steps, dtype=float)
    out = np.empty_like(values)
    h0 = steps[0]
    if np.all(steps == h0):
        a = np.exp(-mu * h0)
        out[..., 0] = 0.0
        # J_k = a J_{k-1} + h/2 (a b_{k-1} + b_k),  J_0 = 0
        zi = np.zeros(values.shape[:-1] + (1,))
        body, _ = lfilter([h0 / 2, a * h0 / 2], [1.0, -a], values[..., 1:],
                          axis=-1, zi=zi + a * h0 / 2 * values[..., :1])
        out[..., 1:] = body
    else:
        decay = np.exp(-mu * steps)
        acc = np.zeros(values.shape[:-1])
        out[..., 0] = 0.0
        for k in range(1, values.shape[-1]):
            h, a = steps[k - 1], decay[k - 1]
            acc = a * acc + 0.5 * h * (a * values[..., k - 1] + values[..., k])
            out[..., k] = acc
    return np.moveaxis(out, -1, axis)


def frac_ou_transform(spec, driver, refined_steps, axis=-1):
    """Centered fO-U values theta (B - mu J) from driving fBm samples."""
    integral = ou_filter(driver, refined_steps, spec.mu, axis=axis)
    return spec.theta * (np.asarray(driver) - spec.mu * integral)


def frac_ou_covariance_grid(spec, grid):
    """Covariance of the centered fO-U process on an increasing grid from 0."""
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must start at 0 and increase strictly")
    if grid.size == 1:
        return np.zeros((1, 1))
    fine, keep = refine_grid(grid, spec.refine_factor)
    steps = np.diff(fine)
    fbm = FBm(spec.H)
    # Rows: apply the linear map to each column block of the fBm covariance.
    left = np.empty((keep.size, fine.size))
    block = 1024
    for start in range(0, fine.size, block):
        cols = fine[start:start + block]
        cov = covariance(fbm, fine[:, None], cols[None, :])
        left[:, start:start + block] = frac_ou_transform(spec, cov, steps, axis=0)[keep]
    out = frac_ou_transform(spec, left, steps, axis=1)[:, keep]
    return 0.5 * (out + out.T)
