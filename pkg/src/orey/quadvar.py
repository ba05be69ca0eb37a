"""Second-order quadratic variations along arbitrary partitions.

For a partition with steps D_k = t_k - t_{k-1} the second-order increment
at an interior point t_k is

    D2_k X = D_k X(t_{k+1}) + D_{k+1} X(t_{k-1}) - (D_k + D_{k+1}) X(t_k),

which annihilates affine functions.  The normalised variation weights its
square by 2 D_{k+1} / mu_k with

    mu_k = (D_k + D_{k+1}) D_k^(gamma + 1/2) D_{k+1}^(gamma + 1/2),

and its expectation tends to 2 kappa^2 int_0^T g(l(t)) dt.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotAvailableError
from .models import FracOU, covariance_matrix, incremental_variance
from .partition import mesh_stats

DENSE_LIMIT = 2048
DEFAULT_BAND = 64


@dataclass(frozen=True)
class SecondIncrements:
    values: np.ndarray
    weights: np.ndarray | None
    gamma: float | None


def _stencil(steps):
    """Coefficients of D2_k on (t_{k-1}, t_k, t_{k+1}) for k = 1..N-1."""
    left, right = steps[:-1], steps[1:]
    return right, -(left + right), left


def mu_weights(steps, gamma):
    left, right = steps[:-1], steps[1:]
    return (left + right) * right ** (gamma + 0.5) * left ** (gamma + 0.5)


def _values_and_steps(path):
    values = np.asarray(path.values, dtype=float)
    steps = path.partition.steps
    if values.shape[-1] != steps.size + 1:
        raise DomainError("path and partition lengths differ")
    return values, steps


def second_increments(path, gamma=None):
    values, steps = _values_and_steps(path)
    a, b, c = _stencil(steps)
    incr = a * values[..., :-2] + b * values[..., 1:-1] + c * values[..., 2:]
    weights = None if gamma is None else mu_weights(steps, gamma)
    return SecondIncrements(incr, weights, gamma)


def _sum(x, axis=-1):
    # compensated summation for long partitions
    if x.shape[axis] >= 10_000:
        return np.apply_along_axis(math.fsum, axis, x)
    return np.sum(x, axis=axis)


def normalized_qv(path, gamma):
    """Weighted variation 2 sum D_{k+1} (D2_k X)^2 / mu_k.  Works row-wise on 2-D values."""
    steps = _values_and_steps(path)[1]
    incr = second_increments(path).values
    w = 2.0 * steps[1:] / mu_weights(steps, gamma)
    return _sum(w * incr * incr)


def regular_qv(values, T, gamma):
    """(N/T)^(2 gamma - 1) sum (X_{k+1} - 2X_k + X_{k-1})^2 for regular grids."""
    values = np.asarray(values, dtype=float)
    N = values.shape[-1] - 1
    d2 = values[..., 2:] - 2 * values[..., 1:-1] + values[..., :-2]
    return (N / T) ** (2 * gamma - 1) * _sum(d2 * d2)


def raw_qv(path):
    """Unweighted sum of squared second-order increments."""
    incr = second_increments(path).values
    return _sum(incr * incr)


def g_function(lam, gamma):
    """g(l) = (1 + l^(2g-1) - (1+l)^(2g-1)) / l^(g - 1/2)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("g is defined for positive ratios only")
    e = 2 * gamma - 1
    out = (1 + lam ** e - (1 + lam) ** e) / lam ** (gamma - 0.5)
    return out if out.ndim else float(out)


def limit_value(profile, ratio, T=None):
    """2 kappa^2 int_0^T g(l(t)) dt for a piecewise-constant ratio profile."""
    if np.any(ratio.values <= 0):
        raise DomainError("ratio values must be positive")
    if T is not None and not math.isclose(T, ratio.T, rel_tol=1e-12):
        raise DomainError("T differs from the horizon of the ratio profile")
    integral = ratio.integrate(lambda v: g_function(v, profile.gamma))
    return 2.0 * profile.kappa ** 2 * integral


def regular_limit(profile, T):
    """kappa^2 (4 - 2^(2 gamma)) T."""
    return profile.kappa ** 2 * (4.0 - 2.0 ** (2 * profile.gamma)) * T


# --- covariance of second-order increments ---------------------------------

@dataclass
class DMatrix:
    """Covariances d_jk = E(D2_j X D2_k X), dense or as upper bands.

    ``band[m, k]`` holds d_{k, k+m} (zero-padded past the end) when the
    matrix is stored banded.
    """

    dense: np.ndarray | None
    band: np.ndarray | None
    p_n: float
    m_n: float
    gamma: float | None = None

    @property
    def size(self):
        return self.dense.shape[0] if self.dense is not None else self.band.shape[1]

    def diagonal(self):
        return np.diag(self.dense).copy() if self.dense is not None else self.band[0].copy()

    def abs_rowsums(self):
        if self.dense is not None:
            return np.abs(self.dense).sum(axis=1)
        n, sums = self.size, np.abs(self.band[0]).copy()
        for m in range(1, self.band.shape[0]):
            upper = np.abs(self.band[m, :n - m])
            sums[:n - m] += upper
            sums[m:] += upper
        return sums

    def toarray(self):
        if self.dense is not None:
            return self.dense.copy()
        n = self.size
        out = np.zeros((n, n))
        for m in range(self.band.shape[0]):
            idx = np.arange(n - m)
            out[idx, idx + m] = self.band[m, :n - m]
            out[idx + m, idx] = self.band[m, :n - m]
        return out


def _variogram(spec, times, a, b):
    return incremental_variance(spec, times[a], times[b])


def d_matrix(spec, p, bandwidth=None, gamma=None):
    """Covariance matrix of the second-order increments of ``spec`` on ``p``.

    Closed-form families use the variogram identity
    Cov(sum c X, sum d X) = -1/2 sum c_a d_b sigma^2(t_a, t_b), valid because
    each stencil sums to zero; it avoids cancellation between large
    covariances.  Up to ``DENSE_LIMIT`` increments the matrix is dense;
    beyond it (or when ``bandwidth`` is given) only |j - k| <= bandwidth is
    kept.
    """
    steps, times = p.steps, p.times
    stats = mesh_stats(p)
    a, b, c = _stencil(steps)
    coef = np.stack([a, b, c])
    n = steps.size - 1
    if bandwidth is None and n > DENSE_LIMIT:
        bandwidth = DEFAULT_BAND
    if bandwidth is None or bandwidth >= n - 1:
        if isinstance(spec, FracOU):
            full = covariance_matrix(spec, times)
            sign = 1.0
        else:
            full = incremental_variance(spec, times[:, None], times[None, :])
            sign = -0.5
        # apply the three-point stencil on both axes
        rows = coef[0][:, None] * full[:-2] + coef[1][:, None] * full[1:-1] + coef[2][:, None] * full[2:]
        dense = sign * (rows[:, :-2] * coef[0] + rows[:, 1:-1] * coef[1] + rows[:, 2:] * coef[2])
        dense = 0.5 * (dense + dense.T)
        return DMatrix(dense, None, stats.p_n, stats.m_n, gamma)
    if isinstance(spec, FracOU):
        raise NotAvailableError("banded d-matrix needs a closed-form incremental variance")
    band = np.zeros((bandwidth + 1, n))
    k = np.arange(n)
    for m in range(bandwidth + 1):
        j = k[:n - m] + m
        acc = np.zeros(n - m)
        for u in range(3):
            for v in range(3):
                acc += coef[u, k[:n - m]] * coef[v, j] * _variogram(spec, times, k[:n - m] + u, j + v)
        band[m, :n - m] = -0.5 * acc
    return DMatrix(None, band, stats.p_n, stats.m_n, gamma)


def second_moments(spec, p):
    """E(D2_k X)^2 for k = 1..N-1 without forming the full matrix."""
    if isinstance(spec, FracOU):
        return d_matrix(spec, p).diagonal()
    steps, times = p.steps, p.times
    coef = np.stack(_stencil(steps))
    k = np.arange(steps.size - 1)
    acc = np.zeros(k.size)
    for u in range(3):
        for v in range(u + 1, 3):
            acc += coef[u] * coef[v] * _variogram(spec, times, k + u, k + v)
    return -acc


def expected_qv(spec, p, profile):
    """Exact E of ``normalized_qv``: 2 sum D_{k+1} E(D2_k X)^2 / mu_k."""
    steps = p.steps
    w = 2.0 * steps[1:] / mu_weights(steps, profile.gamma)
    return float(_sum(w * second_moments(spec, p)))


def rowsum_diagnostic(d):
    """max_k sum_j |d_jk| and its ratio to p_n^(2 + 2 gamma)."""
    if d.gamma is None:
        raise DomainError("DMatrix carries no gamma; pass gamma to d_matrix")
    max_rowsum = float(d.abs_rowsums().max())
    return {"max_rowsum": max_rowsum, "bound_ratio": max_rowsum / d.p_n ** (2 + 2 * d.gamma)}


def weighted_covariance(d, p, gamma):
    """W_jk = 2 sqrt(D_j D_k / (mu_j mu_k)) d_jk, the matrix behind the eigenvalue bound."""
    steps = p.steps
    s = np.sqrt(steps[:-1] / mu_weights(steps, gamma))
    return 2.0 * s[:, None] * d.toarray() * s[None, :]


def eigen_bound(d, p, gamma):
    """Row-sum (Gershgorin) bound on the largest eigenvalue of ``weighted_covariance``."""
    steps = p.steps
    s = np.sqrt(steps[:-1] / mu_weights(steps, gamma))
    if d.dense is not None:
        return float((2.0 * s[:, None] * np.abs(d.dense) * s[None, :]).sum(axis=1).max())
    return float(np.abs(weighted_covariance(d, p, gamma)).sum(axis=1).max())


def diagnostics(d, p, gamma):
    """Summary dict {N, p_n, m_n, max_rowsum, bound_ratio, eigen_bound}."""
    if d.gamma is None:
        d.gamma = gamma
    out = {"N": p.N, "p_n": d.p_n, "m_n": d.m_n}
    out.update(rowsum_diagnostic(d))
    out["eigen_bound"] = eigen_bound(d, p, gamma)
    return out


def d_matrix_to_csv(d, file=None, comment=None):
    """Upper triangle as ``j,k,value`` with 1-based indices."""
    lines = [f"# {ln}" for ln in str(comment).splitlines()] if comment else []
    lines.append("j,k,value")
    if d.dense is not None:
        j, k = np.triu_indices(d.size)
        vals = d.dense[j, k]
    else:
        js, ks, vs = [], [], []
        for m in range(d.band.shape[0]):
            idx = np.arange(d.size - m)
            js.append(idx)
            ks.append(idx + m)
            vs.append(d.band[m, :d.size - m])
        j, k, vals = map(np.concatenate, (js, ks, vs))
        order = np.lexsort((k, j))
        j, k, vals = j[order], k[order], vals[order]
    lines += [f"{a + 1},{b + 1},{v:.17g}" for a, b, v in zip(j, k, vals)]
    text = "\n".join(lines) + "\n"
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text)
    return text


def diagnostics_to_json(diag, file=None):
    text = json.dumps(diag, indent=2, sort_keys=True)
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text + "\n")
    return text
