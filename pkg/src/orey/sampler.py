"""Exact simulation of sample paths on a partition.

Every replica draws its Gaussian variates from its own Philox stream keyed
by ``(master_seed, replica_index)``, so a replica is reproducible on its own
and independent of how many others are generated or in which order.
"""

from __future__ import annotations

import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import lapack

from .errors import DomainError, NumericalPSDError, ParameterError
from .models import (FBm, FBridge, FracOU, covariance_matrix, frac_ou_transform,
                     refine_grid, _bridge_pin, _pow)
from .partition import Partition, make_regular

JITTERS = (0.0, 1e-14, 1e-12, 1e-10)
_EIG_TOL = 1e-9


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int
    replica_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.replica_index < 0:
            raise ParameterError("seeds and replica indices must be non-negative")

    def generator(self):
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.replica_index,))
        return np.random.Generator(np.random.Philox(seq))


def _as_seeds(seeds):
    if isinstance(seeds, SeedPolicy):
        return seeds
    if isinstance(seeds, (int, np.integer)):
        return SeedPolicy(int(seeds))
    raise ParameterError(f"expected SeedPolicy or int seed, got {seeds!r}")


@dataclass
class Path:
    """Values of one sample path at the points of ``partition``.

    ``mean`` holds a deterministic mean already included in ``values``
    (FracOU with x0 != 0); ``driver`` holds the driving fBm at the
    partition points when the path was built from one.
    """

    partition: Partition
    values: np.ndarray
    seed: SeedPolicy | None = None
    spec: object = None
    mean: np.ndarray | None = None
    driver: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.partition),):
            raise DomainError(
                f"path has {self.values.size} values for {len(self.partition)} partition points")

    @property
    def times(self):
        return self.partition.times

    def centered(self):
        if self.mean is None:
            return self
        return replace(self, values=self.values - self.mean, mean=None)

    def restrict(self, sub):
        """The path observed on a sub-partition of its own partition."""
        idx = np.searchsorted(self.partition.times, sub.times)
        idx = np.minimum(idx, len(self.partition) - 1)
        if not np.array_equal(self.partition.times[idx], sub.times):
            raise DomainError("partition is not contained in the path's partition")
        mean = None if self.mean is None else self.mean[idx]
        driver = None if self.driver is None else self.driver[idx]
        return replace(self, partition=sub, values=self.values[idx], mean=mean, driver=driver)


def cholesky_with_jitter(cov):
    """Lower Cholesky factor, adding jitter * max(diag) from ``JITTERS`` on failure."""
    cov = np.asarray(cov, dtype=float)
    scale = float(np.max(np.diag(cov))) if cov.size else 0.0
    info = 0
    for jitter in JITTERS:
        work = cov + jitter * scale * np.eye(cov.shape[0]) if jitter else cov
        factor, info = lapack.dpotrf(work, lower=1, clean=1)
        if info == 0:
            return factor, jitter
    raise NumericalPSDError(
        f"covariance matrix not numerically PSD: leading minor {info} failed "
        f"with jitter {JITTERS[-1]:g} * max diagonal", pivot=int(info), jitter=JITTERS[-1])


# --- engines: precomputed factorisations, one draw per replica ---------------

class _CholeskyEngine:
    """Exact Gaussian vector with covariance ``covariance_matrix(spec, times)``."""

    method = "cholesky"

    def __init__(self, spec, times):
        self.times = np.asarray(times, dtype=float)
        # X(0) = 0 for every centered family; its zero row would break Cholesky
        self.active = self.times > 0
        cov = covariance_matrix(spec, self.times[self.active])
        self.factor, self.jitter = cholesky_with_jitter(cov)

    def draw(self, rng):
        out = np.zeros(self.times.size)
        z = rng.standard_normal(self.factor.shape[0])
        out[self.active] = self.factor @ z
        return out


class _CirculantEngine:
    """Davies-Harte embedding of fractional Gaussian noise on a regular grid."""

    method = "circulant"

    def __init__(self, H, N, T):
        self.N, self.scale = int(N), (T / N) ** H
        k = np.arange(N + 1, dtype=float)
        acov = 0.5 * (_pow(k + 1, 2 * H) - 2 * _pow(k, 2 * H) + _pow(np.abs(k - 1), 2 * H))
        row = np.concatenate([acov, acov[-2:0:-1]])
        eig = np.fft.fft(row).real
        self.ok = bool(eig.min() >= -_EIG_TOL * eig.max())
        self.sqrt_eig = np.sqrt(np.clip(eig, 0.0, None) / row.size)

    def draw(self, rng):
        m = self.sqrt_eig.size
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        noise = np.fft.fft(self.sqrt_eig * z).real[:self.N]
        return np.concatenate([[0.0], np.cumsum(noise * self.scale)])


def _fbm_engine(H, partition):
    if partition.is_regular:
        engine = _CirculantEngine(H, partition.N, partition.T)
        if engine.ok:
            return engine
        fallback = _CholeskyEngine(FBm(H), partition.times)
        fallback.method = "cholesky-fallback"
        return fallback
    return _CholeskyEngine(FBm(H), partition.times)


class _FracOUEngine:
    def __init__(self, spec, partition):
        self.spec = spec
        r = spec.refine_factor
        if partition.is_regular:
            fine = make_regular(partition.N * r, partition.T)
            keep = np.arange(partition.N + 1) * r
        else:
            times, keep = refine_grid(partition.times, r)
            fine = Partition(times)
        self.keep = keep
        self.steps = fine.steps
        self.mean = spec.x0 * np.exp(-spec.mu * partition.times)
        self.inner = _fbm_engine(spec.H, fine)
        self.method = f"fou/{self.inner.method}"

    def draw(self, rng):
        driver = self.inner.draw(rng)
        centered = frac_ou_transform(self.spec, driver, self.steps)
        return centered[self.keep], driver[self.keep]


class _BridgeEngine:
    def __init__(self, spec, partition):
        if abs(partition.T - spec.horizon) > 1e-12 * spec.horizon:
            raise DomainError(
                f"partition horizon {partition.T} differs from bridge horizon {spec.horizon}")
        self.inner = _fbm_engine(spec.H, partition)
        twoH = 2 * spec.H
        weights = _bridge_pin(spec, partition.times) / (2 * _pow(spec.horizon, twoH))
        weights[-1] = 1.0
        self.weights = weights
        self.method = f"bridge/{self.inner.method}"

    def draw(self, rng):
        fbm = self.inner.draw(rng)
        out = fbm - self.weights * fbm[-1]
        out[-1] = 0.0
        return out, fbm


_CACHE = OrderedDict()
_CACHE_SIZE = 8


def _engine(kind, spec, partition):
    key = (kind, spec, partition.times.tobytes(), partition.step)
    engine = _CACHE.get(key)
    if engine is not None:
        _CACHE.move_to_end(key)
        return engine
    if kind == "exact":
        engine = _CholeskyEngine(spec, partition.times)
    elif kind == "fbm":
        engine = _fbm_engine(spec.H, partition)
    elif kind == "fou":
        engine = _FracOUEngine(spec, partition)
    elif kind == "bridge":
        engine = _BridgeEngine(spec, partition)
    else:
        raise ValueError(kind)
    _CACHE[key] = engine
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return engine


# --- public sampling routines ------------------------------------------------

def sample_exact(spec, p, seeds):
    """Draw from the centered Gaussian law with covariance [covariance(t_i, t_j)].

    Uses a Cholesky factor of the kernel matrix for fBm, sfBm and bifBm.
    fO-U paths are built from their driving fBm and returned centered, and
    bridge paths are pinned fBm paths; both are exact for their law.
    """
    seeds = _as_seeds(seeds)
    if isinstance(spec, FracOU):
        return sample_frac_ou(spec, p, seeds).centered()
    if isinstance(spec, FBridge):
        return sample_bridge(spec, p, seeds)
    engine = _engine("exact", spec, p)
    values = engine.draw(seeds.generator())
    return Path(p, values, seeds, spec, provenance={"method": engine.method, "jitter": engine.jitter})


def sample_fbm_fast(H, N, T, seeds):
    """fBm on ``make_regular(N, T)`` by circulant embedding, O(N log N).

    Falls back to Cholesky when the embedding has negative eigenvalues;
    ``provenance["method"]`` records which route produced the path.
    """
    seeds = _as_seeds(seeds)
    p = make_regular(N, T)
    engine = _engine("fbm", FBm(H), p)
    values = engine.draw(seeds.generator())
    return Path(p, values, seeds, FBm(H), provenance={"method": engine.method})


def sample_frac_ou(spec, p, seeds, center=False):
    """fO-U path with its mean x0 exp(-mu t) included unless ``center``."""
    if not isinstance(spec, FracOU):
        raise ParameterError("sample_frac_ou needs a FracOU spec")
    seeds = _as_seeds(seeds)
    engine = _engine("fou", spec, p)
    centered, driver = engine.draw(seeds.generator())
    path = Path(p, centered + engine.mean, seeds, spec, mean=engine.mean.copy(),
                driver=driver, provenance={"method": engine.method})
    return path.centered() if center else path


def sample_bridge(spec, p, seeds):
    if not isinstance(spec, FBridge):
        raise ParameterError("sample_bridge needs an FBridge spec")
    seeds = _as_seeds(seeds)
    engine = _engine("bridge", spec, p)
    values, fbm = engine.draw(seeds.generator())
    return Path(p, values, seeds, spec, driver=fbm, provenance={"method": engine.method})


def sample(spec, p, seeds):
    """Fastest exact route: circulant fBm on regular grids, else ``sample_exact``."""
    seeds = _as_seeds(seeds)
    if isinstance(spec, FBm) and p.is_regular:
        engine = _engine("fbm", spec, p)
        return Path(p, engine.draw(seeds.generator()), seeds, spec,
                    provenance={"method": engine.method})
    return sample_exact(spec, p, seeds)


def default_workers():
    try:
        return max(1, int(os.environ.get("OREY_THREADS", "1")))
    except ValueError:
        return 1


def sample_ensemble(spec, p, replicas, master_seed, first_replica=0, workers=None,
                    route=sample):
    """Centered values of ``replicas`` paths, one row per replica index.

    Row ``r`` equals ``route(spec, p, SeedPolicy(master_seed, first_replica + r)).values``
    bit for bit, whatever the number of worker threads.
    """
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    out = np.empty((int(replicas), len(p)))

    def fill(r):
        out[r] = route(spec, p, SeedPolicy(master_seed, first_replica + r)).centered().values

    if workers == 1:
        for r in range(out.shape[0]):
            fill(r)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, range(out.shape[0])))
    return out


def path_to_csv(path, file=None, comment=None):
    """Columns ``t,x`` with 17 significant digits.  Returns the text."""
    lines = [f"# {ln}" for ln in str(comment).splitlines()] if comment else []
    lines.append("t,x")
    lines += [f"{t:.17g},{x:.17g}" for t, x in zip(path.times, path.values)]
    text = "\n".join(lines) + "\n"
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text)
    return text


def ensemble_to_csv(times, values, file=None, comment=None):
    """Long format ``replica,t,x``."""
    lines = [f"# {ln}" for ln in str(comment).splitlines()] if comment else []
    lines.append("replica,t,x")
    for r, row in enumerate(np.atleast_2d(values)):
        lines += [f"{r},{t:.17g},{x:.17g}" for t, x in zip(times, row)]
    text = "\n".join(lines) + "\n"
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text)
    return text
