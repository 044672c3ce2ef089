"""Ramanujan's inequality pi(x)^2 < (e x / log x) pi(x / e) at every integer x."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Iterator

import numpy as np

from .sieve import MAX_LIMIT, Batch, PrimeCheckpoint, iter_batches

RH_THRESHOLD = 38_358_837_682
UNCONDITIONAL_LOG_THRESHOLD = 9658
LONG_RUN_LIMIT = 4 * 10**10

# e to 60 digits, bracketed by two integers over 10**60
_E_DIGITS = 60
_E_SCALE = 10**_E_DIGITS
with localcontext() as _ctx:
    _ctx.prec = _E_DIGITS + 20
    _E_LO = int(Decimal(1).exp() * _E_SCALE)
_E_HI = _E_LO + 1
_NEAR_INT = 1e-9
_NEAR_TIE = 1e-9


@dataclass(frozen=True)
class RamanujanSample:
    x: int
    pi_x: int
    pi_x_over_e: int
    lhs: float
    rhs: float
    holds: bool


def floor_over_e(x: int) -> int:
    """floor(x / e) exactly, from a 60-digit bracket of e."""
    a, b = x * _E_SCALE // _E_HI, x * _E_SCALE // _E_LO
    if a != b:
        raise ArithmeticError(f"x/e too close to an integer to resolve at x={x}")
    return a


def _floor_over_e_array(x: np.ndarray) -> np.ndarray:
    q = x.astype(np.float64) / math.e
    m = np.floor(q).astype(np.int64)
    tol = np.maximum(_NEAR_INT, 8 * q * 2.0**-52)
    near = np.flatnonzero(np.abs(q - np.rint(q)) < tol)
    for j in near:
        m[j] = floor_over_e(int(x[j]))
    return m


def _exact_holds(x: int, pi_x: int, pi_e: int) -> bool:
    with localcontext() as ctx:
        ctx.prec = 50
        e = Decimal(1).exp()
        d = Decimal(x)
        return Decimal(pi_x) ** 2 < e * d / d.ln() * pi_e


def _evaluate(x: np.ndarray, pi_x: np.ndarray, pi_e: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xf = x.astype(np.float64)
    lhs = pi_x.astype(np.float64) ** 2
    rhs = math.e * xf / np.log(xf) * pi_e
    holds = lhs < rhs
    close = np.flatnonzero(np.abs(lhs - rhs) <= _NEAR_TIE * np.maximum(rhs, 1.0))
    for j in close:
        holds[j] = _exact_holds(int(x[j]), int(pi_x[j]), int(pi_e[j]))
    return lhs, rhs, holds


def ramanujan_sample(x: int) -> RamanujanSample:
    """Single-point evaluation by plain sieving; for spot checks."""
    if x < 3:
        raise ValueError("x must be >= 3")
    report_x = np.array([x], dtype=np.int64)
    pi_x = _count_primes_upto(x)
    pi_e = _count_primes_upto(floor_over_e(x))
    lhs, rhs, holds = _evaluate(report_x, np.array([pi_x]), np.array([pi_e]))
    return RamanujanSample(x, pi_x, pi_e, float(lhs[0]), float(rhs[0]), bool(holds[0]))


def _count_primes_upto(n: int) -> int:
    if n < 2:
        return 0
    return sum(int(b.primes.size) for b in iter_batches(n, cadence=None))


class _LaggingPi:
    """pi(m) for nondecreasing windows of m, fed by a second prime stream."""

    def __init__(self, limit: int, start: PrimeCheckpoint | None, **kwargs):
        self.stream: Iterator[Batch] | None = iter_batches(limit, start=start, cadence=None, **kwargs) if limit >= 2 else None
        self.window: list[Batch] = []
        self.base_pi = start.pi_x if start else 0
        self.covered = start.x if start else 1

    def counts(self, m: np.ndarray) -> np.ndarray:
        lo, hi = int(m[0]), int(m[-1])
        while self.covered < hi:
            batch = next(self.stream)
            self.window.append(batch)
            self.covered = batch.hi - 1
        while self.window and self.window[0].hi - 1 < lo:
            dropped = self.window.pop(0)
            self.base_pi = dropped.pi_before + int(dropped.primes.size)
        if not self.window:
            return np.full(m.size, self.base_pi, dtype=np.int64)
        primes = np.concatenate([b.primes for b in self.window])
        base = self.window[0].pi_before
        return base + np.searchsorted(primes, m, side="right")


@dataclass
class RamanujanReport:
    lo: int
    limit: int
    violations: list[tuple[int, int]] = field(default_factory=list)
    violation_count: int = 0
    runtime_s: float = 0.0

    @property
    def largest_violation(self) -> int | None:
        return self.violations[-1][1] if self.violations else None

    def merge(self, other: "RamanujanReport") -> "RamanujanReport":
        """Concatenate two adjacent x-ranges, joining intervals that touch."""
        a, b = (self, other) if self.lo <= other.lo else (other, self)
        if a.limit + 1 != b.lo:
            raise ValueError(f"ranges [{a.lo}, {a.limit}] and [{b.lo}, {b.limit}] are not adjacent")
        runs = list(a.violations)
        for r in b.violations:
            if runs and runs[-1][1] + 1 == r[0]:
                runs[-1] = (runs[-1][0], r[1])
            else:
                runs.append(r)
        return RamanujanReport(a.lo, b.limit, runs, a.violation_count + b.violation_count, a.runtime_s + b.runtime_s)


def scan_ramanujan(
    limit: int,
    *,
    lo: int = 3,
    store=None,
    max_limit: int = MAX_LIMIT,
    segment_size: int | None = None,
) -> RamanujanReport:
    """Check the inequality at every integer x in [lo, limit].

    Returns the maximal runs of consecutive violating integers.  Shards start
    from checkpoints in ``store`` when available.
    """
    if lo < 3:
        raise ValueError("lo must be >= 3")
    if limit < lo:
        raise ValueError(f"need limit >= lo, got {limit} < {lo}")
    t0 = time.perf_counter()
    kwargs = {"max_limit": max_limit}
    if segment_size is not None:
        kwargs["segment_size"] = segment_size
    start = store.latest(at_most=lo - 1) if store is not None else None
    lag_limit = floor_over_e(limit)
    lag_start = store.latest(at_most=min(floor_over_e(lo), lag_limit) - 1) if store is not None else None
    lag = _LaggingPi(lag_limit, lag_start, **kwargs)

    report = RamanujanReport(lo, limit)
    run_start: int | None = None
    for batch in iter_batches(limit, start=start, cadence=None, **kwargs):
        a = max(batch.lo, lo)
        if a >= batch.hi:
            continue
        x = np.arange(a, batch.hi, dtype=np.int64)
        pi_x = batch.pi_before + np.searchsorted(batch.primes, x, side="right")
        pi_e = lag.counts(_floor_over_e_array(x))
        _, _, holds = _evaluate(x, pi_x, pi_e)
        bad = ~holds
        report.violation_count += int(bad.sum())
        edges = np.diff(np.concatenate([[False], bad, [False]]).astype(np.int8))
        starts = x[0] + np.flatnonzero(edges == 1)
        ends = x[0] + np.flatnonzero(edges == -1) - 1
        for s, e in zip(starts.tolist(), ends.tolist()):
            if run_start is not None and s == x[0]:
                s = run_start
                report.violations.pop()
            report.violations.append((s, e))
            run_start = s if e == x[-1] else None
        if not bad[-1]:
            run_start = None
    report.runtime_s = time.perf_counter() - t0
    return report


def context_thresholds(report: RamanujanReport | None = None) -> dict:
    """External thresholds beyond which the inequality is known, with the scan's own largest violation."""
    out = {
        "rh_conditional_threshold": RH_THRESHOLD,
        "unconditional_threshold_log": UNCONDITIONAL_LOG_THRESHOLD,
        "unconditional_threshold": f"exp({UNCONDITIONAL_LOG_THRESHOLD})",
    }
    if report is not None:
        largest = report.largest_violation
        out["scan_limit"] = report.limit
        out["largest_violation"] = largest
        out["consistent"] = largest is None or largest <= RH_THRESHOLD
    return out


def write_violations(report: RamanujanReport, path) -> None:
    with open(path, "w") as fh:
        for a, b in report.violations:
            fh.write(f"{a} {b}\n")
