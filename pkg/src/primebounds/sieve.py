"""Segmented sieve of Eratosthenes with streaming pi, theta and psi accumulators.

The scan hands every consumer ("sink") one :class:`Batch` per segment.  A batch
carries the primes and proper prime powers found in ``[lo, hi)`` together with
the running totals *before* the segment, so a sink can vectorise its work over
the whole segment instead of being called once per prime.

theta and psi are accumulated exactly.  Every ``np.log(p)`` for ``p >= 2`` is at
least 0.69, so its float64 value is an integer multiple of 2**-53; the scan sums
those integers in Python ints.  The only error left is the error of ``np.log``
itself, which is what ``theta_err`` bounds.  Exact sums also make results
independent of how the range is cut into segments.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

DEFAULT_SEGMENT_SIZE = 1 << 20
MIN_SEGMENT_SIZE = 1 << 16
MAX_SEGMENT_SIZE = 1 << 26
DEFAULT_CADENCE = 10**7
MAX_LIMIT = 10**10

FIXED_BITS = 53
_SCALE = float(2**FIXED_BITS)
_HALF_BITS = 26
_HALF_MASK = (1 << _HALF_BITS) - 1
# np.log is within 1 ulp of glibc's log, which is itself within 1 ulp.
_LOG_ULPS = 4
LOG_REL_ERR = _LOG_ULPS * 2.0**-52

_WHEEL = np.array([math.gcd(i, 30) == 1 for i in range(30)], dtype=bool)


class CapacityError(ValueError):
    """Requested range exceeds what the engine is configured to sieve."""


class OutOfRangeError(ValueError):
    """Query outside the range covered by a scan or checkpoint store."""


def small_primes(n: int) -> np.ndarray:
    """All primes <= n by a plain (unsegmented) sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass
class SieveSegment:
    lo: int
    hi: int
    flags: np.ndarray

    def primes(self) -> np.ndarray:
        return self.lo + np.flatnonzero(self.flags).astype(np.int64)


def _mark(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    n = hi - lo
    flags = np.resize(np.roll(_WHEEL, -(lo % 30)), n)
    for p in (2, 3, 5):
        if lo <= p < hi:
            flags[p - lo] = True
    root = math.isqrt(hi - 1)
    for p in base:
        p = int(p)
        if p < 7:
            continue
        if p > root:
            break
        start = max(p * p, -(-lo // p) * p)
        if start < hi:
            flags[start - lo :: p] = False
    return flags


def sieve_range(
    lo: int,
    hi: int,
    base: np.ndarray | None = None,
    *,
    max_span: int = MAX_SEGMENT_SIZE,
    max_limit: int = MAX_LIMIT,
) -> SieveSegment:
    """Primality flags for the integers in ``[lo, hi)``.

    ``base`` must contain every prime up to ``isqrt(hi - 1)``; it is computed
    when omitted.
    """
    if not 2 <= lo < hi:
        raise ValueError(f"need 2 <= lo < hi, got lo={lo}, hi={hi}")
    if hi - lo > max_span:
        raise CapacityError(f"segment span {hi - lo} exceeds {max_span}")
    if hi - 1 > max_limit:
        raise CapacityError(f"hi={hi} exceeds the configured limit {max_limit}")
    if base is None:
        base = small_primes(math.isqrt(hi - 1))
    return SieveSegment(lo, hi, _mark(lo, hi, base))


def fixed_log_sum(logs: np.ndarray) -> int:
    """Exact sum of float64 values >= 0.5, in units of 2**-53."""
    if logs.size == 0:
        return 0
    q = (logs * _SCALE).astype(np.int64)
    return (int((q >> _HALF_BITS).sum()) << _HALF_BITS) + int((q & _HALF_MASK).sum())


def fixed_to_float(value: int) -> float:
    return value / (1 << FIXED_BITS)


def theta_error_bound(theta: float) -> float:
    """Bound on |stored theta - exact theta| for a sum of logs totalling ``theta``."""
    return LOG_REL_ERR * theta + 0.5 * math.ulp(theta) if theta else 0.0


@dataclass(frozen=True)
class GapRecord:
    p: int
    q: int

    @property
    def gap(self) -> int:
        return self.q - self.p


@dataclass(frozen=True)
class PrimeCheckpoint:
    x: int
    pi_x: int
    theta_x: float
    psi_x: float
    theta_err: float
    max_gap: int
    last_prime: int
    theta_fixed: int = 0
    psi_fixed: int = 0

    @classmethod
    def origin(cls) -> "PrimeCheckpoint":
        return cls(x=1, pi_x=0, theta_x=0.0, psi_x=0.0, theta_err=0.0, max_gap=0, last_prime=0)


@dataclass
class Batch:
    """Primes and prime powers of one segment plus the totals before it."""

    lo: int
    hi: int
    primes: np.ndarray
    powers: np.ndarray
    power_bases: np.ndarray
    pi_before: int
    theta_before: float
    psi_before: float
    last_prime_before: int

    @cached_property
    def prime_logs(self) -> np.ndarray:
        return np.log(self.primes.astype(np.float64))

    @cached_property
    def pi_values(self) -> np.ndarray:
        return self.pi_before + np.arange(1, self.primes.size + 1, dtype=np.int64)

    @cached_property
    def theta_values(self) -> np.ndarray:
        """theta at each prime of the segment."""
        return self.theta_before + np.cumsum(self.prime_logs)

    @cached_property
    def _psi_merge(self) -> tuple[np.ndarray, np.ndarray]:
        points = np.concatenate([self.primes, self.powers])
        logs = np.concatenate([self.prime_logs, np.log(self.power_bases.astype(np.float64))])
        order = np.argsort(points, kind="stable")
        return points[order], logs[order]

    @property
    def psi_points(self) -> np.ndarray:
        """Jump points of psi in the segment (primes and prime powers), sorted."""
        return self._psi_merge[0]

    @cached_property
    def psi_values(self) -> np.ndarray:
        return self.psi_before + np.cumsum(self._psi_merge[1])


Sink = Callable[[Batch], None]


def _prime_powers(base: np.ndarray, limit: int) -> tuple[np.ndarray, np.ndarray]:
    pts, bases = [], []
    for p in base.tolist():
        q = p * p
        if q > limit:
            break
        while q <= limit:
            pts.append(q)
            bases.append(p)
            q *= p
    pts_a = np.array(pts, dtype=np.int64)
    order = np.argsort(pts_a, kind="stable")
    return pts_a[order], np.array(bases, dtype=np.int64)[order]


def segment_bounds(start: int, limit: int, segment_size: int, cadence: int | None) -> list[tuple[int, int]]:
    """Half-open segments covering ``[start, limit]``, cut at multiples of ``cadence``."""
    out = []
    lo = start
    while lo <= limit:
        hi = min(lo + segment_size, limit + 1)
        if cadence:
            boundary = (lo // cadence + 1) * cadence + 1
            hi = min(hi, boundary)
        out.append((lo, hi))
        lo = hi
    return out


_worker_base: np.ndarray | None = None


def _init_worker(base: np.ndarray) -> None:
    global _worker_base
    _worker_base = base


def _sieve_job(bounds: tuple[int, int]) -> np.ndarray:
    lo, hi = bounds
    return lo + np.flatnonzero(_mark(lo, hi, _worker_base)).astype(np.int64)


def _segment_primes(
    bounds: Sequence[tuple[int, int]], base: np.ndarray, workers: int
) -> Iterator[np.ndarray]:
    if workers <= 1:
        for lo, hi in bounds:
            yield lo + np.flatnonzero(_mark(lo, hi, base)).astype(np.int64)
        return
    # map() yields in submission order, so the merge below stays single-writer and in order.
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(base,)) as pool:
        yield from pool.map(_sieve_job, bounds, chunksize=1)


def validate_segment_size(segment_size: int) -> None:
    if segment_size & (segment_size - 1) or not MIN_SEGMENT_SIZE <= segment_size <= MAX_SEGMENT_SIZE:
        raise ValueError(f"segment_size must be a power of two in [2**16, 2**26], got {segment_size}")


@dataclass
class _Running:
    x: int
    pi: int
    theta_fixed: int
    psi_fixed: int
    last_prime: int
    max_gap: int

    @classmethod
    def from_checkpoint(cls, cp: PrimeCheckpoint) -> "_Running":
        return cls(cp.x, cp.pi_x, cp.theta_fixed, cp.psi_fixed, cp.last_prime, cp.max_gap)

    def checkpoint(self) -> PrimeCheckpoint:
        theta = fixed_to_float(self.theta_fixed)
        return PrimeCheckpoint(
            x=self.x,
            pi_x=self.pi,
            theta_x=theta,
            psi_x=fixed_to_float(self.psi_fixed),
            theta_err=theta_error_bound(theta),
            max_gap=self.max_gap,
            last_prime=self.last_prime,
            theta_fixed=self.theta_fixed,
            psi_fixed=self.psi_fixed,
        )


def iter_batches(
    limit: int,
    *,
    start: PrimeCheckpoint | None = None,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    cadence: int | None = DEFAULT_CADENCE,
    workers: int = 1,
    max_limit: int = MAX_LIMIT,
    on_checkpoint: Callable[[PrimeCheckpoint], None] | None = None,
) -> Iterator[Batch]:
    """Yield one :class:`Batch` per segment of ``[start.x + 1, limit]``.

    ``on_checkpoint`` is called after every segment that ends on a multiple of
    ``cadence`` and once more at ``limit``.
    """
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if limit > max_limit:
        raise CapacityError(f"limit {limit} exceeds the configured maximum {max_limit}")
    validate_segment_size(segment_size)
    start = start or PrimeCheckpoint.origin()
    if start.x > limit:
        raise ValueError(f"start checkpoint x={start.x} lies beyond limit={limit}")
    state = _Running.from_checkpoint(start)
    base = small_primes(math.isqrt(limit))
    powers, power_bases = _prime_powers(base, limit)
    bounds = segment_bounds(max(start.x + 1, 2), limit, segment_size, cadence)

    for (lo, hi), primes in zip(bounds, _segment_primes(bounds, base, workers)):
        a, b = np.searchsorted(powers, [lo, hi])
        batch = Batch(
            lo=lo,
            hi=hi,
            primes=primes,
            powers=powers[a:b],
            power_bases=power_bases[a:b],
            pi_before=state.pi,
            theta_before=fixed_to_float(state.theta_fixed),
            psi_before=fixed_to_float(state.psi_fixed),
            last_prime_before=state.last_prime,
        )
        yield batch

        if primes.size:
            head = np.concatenate([[state.last_prime], primes]) if state.last_prime else primes
            if head.size > 1:
                state.max_gap = max(state.max_gap, int(np.diff(head).max()))
            state.last_prime = int(primes[-1])
        theta_part = fixed_log_sum(batch.prime_logs)
        state.pi += int(primes.size)
        state.theta_fixed += theta_part
        state.psi_fixed += theta_part + fixed_log_sum(np.log(batch.power_bases.astype(np.float64)))
        state.x = hi - 1
        if on_checkpoint and ((cadence and state.x % cadence == 0) or state.x == limit):
            on_checkpoint(state.checkpoint())


def scan(
    limit: int,
    sink: Sink | Iterable[Sink] | None = None,
    *,
    start: PrimeCheckpoint | None = None,
    store=None,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    cadence: int | None = DEFAULT_CADENCE,
    workers: int = 1,
    max_limit: int = MAX_LIMIT,
) -> PrimeCheckpoint:
    """Stream ``[2, limit]`` through ``sink`` and return the final checkpoint.

    With a ``store`` (a :class:`~primebounds.checkpoints.CheckpointStore`) the
    scan resumes from the store's latest checkpoint at or below ``limit`` and
    appends a record at every cadence boundary.
    """
    sinks: list[Sink]
    if sink is None:
        sinks = []
    elif callable(sink):
        sinks = [sink]
    else:
        sinks = list(sink)

    if store is not None and start is None:
        start = store.latest(at_most=limit)
    if start is not None and start.x == limit:
        return start

    final: list[PrimeCheckpoint] = []

    def record(cp: PrimeCheckpoint) -> None:
        if store is not None:
            store.append(cp)
        final.append(cp)

    for batch in iter_batches(
        limit,
        start=start,
        segment_size=segment_size,
        cadence=cadence,
        workers=workers,
        max_limit=max_limit,
        on_checkpoint=record,
    ):
        for s in sinks:
            s(batch)
    return final[-1]


@dataclass
class PrimeCollector:
    """Sink that keeps every prime; only for small limits."""

    chunks: list[np.ndarray] = field(default_factory=list)

    def __call__(self, batch: Batch) -> None:
        self.chunks.append(batch.primes)

    def primes(self) -> np.ndarray:
        return np.concatenate(self.chunks) if self.chunks else np.zeros(0, dtype=np.int64)


def primes_upto(limit: int, **kwargs) -> np.ndarray:
    collector = PrimeCollector()
    scan(limit, collector, **kwargs)
    return collector.primes()


def next_prime_after(n: int) -> int:
    lo = max(n + 1, 2)
    span = 256
    while True:
        found = sieve_range(lo, lo + span).primes()
        if found.size:
            return int(found[0])
        lo += span
        span *= 2


def theta_psi_at(x: float, store) -> tuple[float, float]:
    """theta(x) and psi(x) from a checkpoint store, re-sieving from the nearest checkpoint."""
    n = math.floor(x)
    if n < 2:
        raise OutOfRangeError(f"x={x} is below 2")
    top = store.latest()
    if top is None or n > top.x:
        raise OutOfRangeError(f"x={x} is beyond the scanned range (largest checkpoint {top.x if top else None})")
    cp = store.latest(at_most=n)
    if cp is None or cp.x != n:
        cp = scan(n, start=cp, cadence=None)
    return cp.theta_x, cp.psi_x
