"""Regular and irregular partitions of [0, T]."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DomainError, ParameterError, SizeError


class Partition:
    """Strictly increasing grid ``0 = t_0 < t_1 < ... < t_N = T`` with N >= 3.

    ``step`` is set for regular partitions; their increments are then the
    exact value ``T / N`` rather than differences of rounded times.
    """

    __slots__ = ("_times", "step")

    def __init__(self, times, step=None):
        times = np.array(times, dtype=float)
        if times.ndim != 1:
            raise DomainError("partition times must be one-dimensional")
        if times.size < 4:
            raise SizeError(f"a partition needs N >= 3 steps, got {times.size - 1}")
        if times[0] != 0.0:
            raise DomainError("a partition must start at 0")
        if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
            raise DomainError("partition times must increase strictly")
        times.setflags(write=False)
        self._times = times
        self.step = None if step is None else float(step)

    @property
    def times(self):
        return self._times

    @property
    def T(self):
        return float(self._times[-1])

    @property
    def N(self):
        return self._times.size - 1

    @property
    def is_regular(self):
        return self.step is not None

    @property
    def steps(self):
        if self.step is not None:
            return np.full(self.N, self.step)
        return np.diff(self._times)

    def __len__(self):
        return self._times.size

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self._times, other._times)

    def __hash__(self):
        return hash(self._times.tobytes())

    def __repr__(self):
        kind = "regular" if self.is_regular else "irregular"
        return f"Partition({kind}, N={self.N}, T={self.T:g})"


@dataclass(frozen=True)
class MeshStats:
    m_n: float
    p_n: float
    c_ratio: float


@dataclass(frozen=True)
class RatioProfile:
    """Step function l_n(t) = sum_k l_k 1[t_k, t_{k+1})(t), l_k = D_k / D_{k+1}.

    ``breakpoints`` are t_1 .. t_{N-1}.  For integration over [0, T] the
    first value is extended down to 0, so the pieces have lengths
    t_2, D_3, ..., D_N and sum to T.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    T: float

    @property
    def lengths(self):
        edges = np.concatenate([[0.0], self.breakpoints[1:], [self.T]])
        return np.diff(edges)

    def range_set(self, decimals=12):
        return np.unique(np.round(self.values, decimals))

    def integrate(self, func):
        return float(np.sum(self.lengths * func(self.values)))


def make_regular(N, T=1.0):
    if int(N) != N or N < 3:
        raise SizeError(f"N must be an integer >= 3, got {N!r}")
    if not (np.isfinite(T) and T > 0):
        raise ParameterError(f"T must be positive, got {T!r}")
    N = int(N)
    times = T * (np.arange(N + 1) / N)
    times[-1] = T
    return Partition(times, step=T / N)


def make_alternating(alpha, pairs, T=1.0):
    """Steps h, alpha h, h, alpha h, ... summing to T."""
    if not (np.isfinite(alpha) and alpha > 0):
        raise ParameterError(f"alpha must be positive, got {alpha!r}")
    if int(pairs) != pairs or pairs < 2:
        raise SizeError(f"pairs must be an integer >= 2, got {pairs!r}")
    if not (np.isfinite(T) and T > 0):
        raise ParameterError(f"T must be positive, got {T!r}")
    pairs = int(pairs)
    h = T / (pairs * (1.0 + alpha))
    times = np.empty(2 * pairs + 1)
    times[0::2] = T * (np.arange(pairs + 1) / pairs)
    times[1::2] = times[0:-1:2] + h
    times[-1] = T
    return Partition(times)


def make_perturbed(N, T=1.0, c_max=2.0, seed=None):
    """Steps uniform on [1, c_max], rescaled to sum to T."""
    if not (np.isfinite(c_max) and c_max >= 1):
        raise ParameterError(f"c_max must be >= 1, got {c_max!r}")
    if c_max == 1:
        return make_regular(N, T)
    if int(N) != N or N < 3:
        raise SizeError(f"N must be an integer >= 3, got {N!r}")
    rng = np.random.default_rng(seed)
    steps = rng.uniform(1.0, c_max, size=int(N))
    times = np.concatenate([[0.0], np.cumsum(steps)])
    times *= T / times[-1]
    times[-1] = T
    return Partition(times)


def subsample(p, stride):
    """Keep every ``stride``-th point of ``p`` (0 and T included)."""
    if int(stride) != stride or stride < 2:
        raise ParameterError(f"stride must be an integer >= 2, got {stride!r}")
    stride = int(stride)
    if p.N % stride:
        raise AlignmentError(f"stride {stride} does not divide N = {p.N}")
    M = p.N // stride
    if M < 3:
        raise SizeError(f"subsampled partition would have N = {M} < 3")
    step = p.T / M if p.is_regular else None
    return Partition(p.times[::stride], step=step)


def is_subpartition(coarse, fine):
    """True when every point of ``coarse`` is a point of ``fine``."""
    idx = np.searchsorted(fine.times, coarse.times)
    return bool(np.all(idx < len(fine)) and np.array_equal(fine.times[np.minimum(idx, len(fine) - 1)], coarse.times))


def mesh_stats(p):
    if p.is_regular:
        return MeshStats(p.step, p.step, 1.0)
    steps = p.steps
    m, q = float(steps.max()), float(steps.min())
    return MeshStats(m, q, m / q)


def ratio_profile(p):
    steps = p.steps
    return RatioProfile(p.times[1:-1].copy(), steps[:-1] / steps[1:], p.T)


def to_csv(p, file=None, comment=None):
    """Single column ``t`` with 17 significant digits.  Returns the text."""
    buf = io.StringIO()
    if comment:
        for line in str(comment).splitlines():
            buf.write(f"# {line}\n")
    buf.write("t\n")
    for t in p.times:
        buf.write(f"{t:.17g}\n")
    text = buf.getvalue()
    if file is not None:
        with open(file, "w", newline="\n") as fh:
            fh.write(text)
    return text


def from_csv(file):
    with open(file) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != "t":
        raise DomainError("partition CSV must have the single header 't'")
    times = np.array([float(x) for x in lines[1:]])
    N = times.size - 1
    if N >= 3 and np.array_equal(times, make_regular(N, times[-1]).times):
        return make_regular(N, times[-1])
    return Partition(times)
