"""Maximal prime gaps, primes in [x, x(1 + 1/(c log^2 x))], and the gap cascade."""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .search import least_integer_where, root_increasing
from .sieve import Batch, GapRecord, next_prime_after, scan

# x (1 + 1/(c log^2 x)) is increasing on [2, oo) once c log(2)^3 + log 2 >= 2.
MIN_INTERVAL_C = (2 - math.log(2)) / math.log(2) ** 3


class GapTracker:
    """Sink recording every new maximal gap p -> q with p < ``below``."""

    def __init__(self, below: int | None = None):
        self.below = below
        self.last = 0
        self.best = 0
        self.records: list[GapRecord] = []

    def _consume(self, primes: np.ndarray) -> None:
        if primes.size == 0:
            return
        seq = np.concatenate([[self.last], primes]) if self.last else primes
        if seq.size > 1:
            gaps = np.diff(seq)
            starts = seq[:-1]
            if self.below is not None:
                keep = starts < self.below
                gaps, starts = gaps[keep], starts[keep]
            if gaps.size:
                running = np.maximum.accumulate(np.concatenate([[self.best], gaps]))
                for j in np.flatnonzero(gaps > running[:-1]):
                    self.records.append(GapRecord(int(starts[j]), int(starts[j] + gaps[j])))
                self.best = int(running[-1])
        self.last = int(primes[-1])

    def __call__(self, batch: Batch) -> None:
        self._consume(batch.primes)

    def close(self) -> None:
        """Account for the gap from the last scanned prime to the next one."""
        if self.last and (self.below is None or self.last < self.below):
            self._consume(np.array([next_prime_after(self.last)], dtype=np.int64))


@dataclass
class GapTable:
    """Running maxima of prime gaps, answering max-gap queries below ``covered``."""

    records: list[GapRecord]
    covered: int

    @classmethod
    def scan(cls, limit: int, **scan_kwargs) -> "GapTable":
        tracker = GapTracker(below=limit)
        scan(max(limit - 1, 2), tracker, **scan_kwargs)
        tracker.close()
        return cls(tracker.records, limit)

    def max_gap(self, limit: int) -> tuple[int, GapRecord]:
        if limit > self.covered:
            raise ValueError(f"gap table covers p < {self.covered}, asked for {limit}")
        starts = [r.p for r in self.records]
        i = bisect.bisect_left(starts, limit) - 1
        if i < 0:
            raise ValueError(f"no prime gap starts below {limit}")
        rec = self.records[i]
        return rec.gap, rec

    def __call__(self, limit: int) -> int:
        return self.max_gap(limit)[0]


def max_gap(limit: int, **scan_kwargs) -> tuple[int, GapRecord]:
    """Largest p_{n+1} - p_n with p_n < limit, and where it occurs."""
    if limit < 5:
        raise ValueError("limit must be >= 5")
    return GapTable.scan(limit, **scan_kwargs).max_gap(limit)


# --- primes in short intervals ---------------------------------------------------


def interval_end(x, c: float):
    """Right end x (1 + 1/(c log^2 x)) of the interval starting at x."""
    L = np.log(x)
    return x * (1 + 1 / (c * L * L))


@dataclass
class ShortIntervalResult:
    c: float
    limit: int
    largest_failing_x: int | None
    threshold: int
    failing_gaps: int
    last_failing_gap: GapRecord | None


class ShortIntervalScanner:
    """Sink finding prime gaps (p, q) with p (1 + 1/(c log^2 p)) < q and p < limit.

    Inside such a gap every x in (p, r), interval_end(r) = q, has a prime-free
    interval; the interval from x = p itself contains p.
    """

    def __init__(self, limit: int, c: float, keep: int = 64):
        if c < MIN_INTERVAL_C:
            raise ValueError(f"c must be >= {MIN_INTERVAL_C:.4f} so the interval end is increasing on [2, oo)")
        self.limit, self.c = limit, c
        self.last = 0
        self.count = 0
        self.recent: deque[tuple[int, int]] = deque(maxlen=keep)

    def _consume(self, primes: np.ndarray) -> None:
        if primes.size == 0:
            return
        seq = np.concatenate([[self.last], primes]) if self.last else primes
        p, q = seq[:-1], seq[1:]
        keep = p < self.limit
        p, q = p[keep], q[keep]
        if p.size:
            bad = np.flatnonzero(interval_end(p.astype(np.float64), self.c) < q)
            self.count += int(bad.size)
            for j in bad[-self.recent.maxlen :]:
                self.recent.append((int(p[j]), int(q[j])))
        self.last = int(primes[-1])

    def __call__(self, batch: Batch) -> None:
        self._consume(batch.primes)

    def _onset(self, p: int, q: int) -> float:
        return root_increasing(lambda t: float(interval_end(t, self.c)) - q, float(p), float(q))

    def finish(self) -> ShortIntervalResult:
        if self.last and self.last < self.limit:
            self._consume(np.array([next_prime_after(self.last)], dtype=np.int64))
        if not self.recent:
            return ShortIntervalResult(self.c, self.limit, None, 2, 0, None)
        p, q = self.recent[-1]
        threshold = math.ceil(self._onset(p, q))
        largest = None
        for p_, q_ in reversed(self.recent):
            n = min(math.ceil(self._onset(p_, q_)) - 1, self.limit - 1)
            if n > p_:
                largest = n
                break
        return ShortIntervalResult(self.c, self.limit, largest, threshold, self.count, GapRecord(p, q))


def verify_short_interval(limit: int, c: float = 111.0, **scan_kwargs) -> ShortIntervalResult:
    """Least integer t such that every real x in [t, limit) has a prime in [x, x(1 + 1/(c log^2 x))]."""
    scanner = ShortIntervalScanner(limit, c)
    scan(max(limit - 1, 2), scanner, **scan_kwargs)
    return scanner.finish()


# --- cascade ----------------------------------------------------------------------


def cascade_step(gap_bound: int, c: float) -> int:
    """Least integer y >= 8 with t / log^2 t >= c * gap_bound for every t >= y."""
    if gap_bound < 1 or c <= 0:
        raise ValueError("need gap_bound >= 1 and c > 0")
    target = c * gap_bound
    return least_integer_where(lambda n: n / math.log(n) ** 2 >= target, 8)


@dataclass(frozen=True)
class CascadeStage:
    x_upper: int
    gap_bound: int
    y_lower: int
    source: str = "computed"


@dataclass
class CascadeState:
    c: float
    stages: list[CascadeStage] = field(default_factory=list)

    @property
    def frontier(self) -> int | None:
        return self.stages[-1].y_lower if self.stages else None


def run_cascade(
    initial: tuple[int, int],
    c: float,
    known_gaps: Callable[[int], int],
    *,
    floor: int | None = None,
    uppers: list[int] | None = None,
    initial_source: str = "declared",
    max_stages: int = 64,
) -> CascadeState:
    """Shrink the frontier below which the short-interval claim is unverified.

    Each stage takes a gap bound X valid for p_n <= x and certifies
    p_{n+1} <= p_n (1 + 1/(c log^2 p_n)) for p_n in [y, x], y = cascade_step(X, c).
    The next stage's x is y itself, or ``uppers[i]`` when given (it must be >= y).
    Stops once y stops decreasing or falls to ``floor``.
    """
    x, gap = initial
    state = CascadeState(c)
    source = initial_source
    for i in range(max_stages):
        y = cascade_step(gap, c)
        if y > x:
            break
        if state.stages and y >= state.stages[-1].y_lower:
            break
        state.stages.append(CascadeStage(int(x), int(gap), y, source))
        if floor is not None and y <= floor:
            break
        if uppers is not None:
            if i >= len(uppers):
                break
            if uppers[i] < y:
                raise ValueError(f"stage upper {uppers[i]} lies below the frontier {y}")
            x = int(uppers[i])
        else:
            x = y
        gap = known_gaps(x)
        source = "computed"
    return state
