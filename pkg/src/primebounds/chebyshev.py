"""Scanning theta and psi (and pi - li) against explicit bounds.

theta and psi are right-continuous step functions while the bound envelopes
``x (1 +- r(x))`` are continuous and increasing.  So on a step ``[p, q)`` the
upper check binds at ``x = p`` and the lower check binds as ``x -> q-``; those
two evaluations per jump decide the inequality for every real x.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic
from .analytic import BoundSpec, DomainError
from .search import root_increasing
from .sieve import Batch, OutOfRangeError, PrimeCheckpoint, scan

MAX_STORED_VIOLATIONS = 1000
KOTNIK_LIMIT = 10**14


@dataclass(frozen=True)
class Violation:
    x: float
    side: str
    value: float
    bound: float
    left_limit: bool
    clear_from: int

    @property
    def excess(self) -> float:
        return self.value - self.bound if self.side == "upper" else self.bound - self.value


@dataclass
class VerificationReport:
    check: str
    lo: int
    hi: int
    spec: BoundSpec | None = None
    violations: list[Violation] = field(default_factory=list)
    violation_count: int = 0
    min_threshold: int | None = None
    worst_margin: tuple[float, float] | None = None
    applicable: bool = True
    runtime_s: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return self.violation_count == 0

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        """Combine reports of adjacent shards; order-independent."""
        seen = {(v.x, v.side, v.left_limit): v for v in self.violations + other.violations}
        viol = sorted(seen.values(), key=lambda v: (v.x, v.side, v.left_limit))
        dup = len(self.violations) + len(other.violations) - len(viol)
        thresholds = [t for t in (self.min_threshold, other.min_threshold) if t is not None]
        lo = min(self.lo, other.lo)
        if viol:
            threshold = max(v.clear_from for v in viol)
        else:
            threshold = lo if thresholds else None
        margins = [m for m in (self.worst_margin, other.worst_margin) if m is not None]
        return VerificationReport(
            check=self.check,
            lo=lo,
            hi=max(self.hi, other.hi),
            spec=self.spec,
            violations=viol[:MAX_STORED_VIOLATIONS],
            violation_count=self.violation_count + other.violation_count - dup,
            min_threshold=threshold,
            worst_margin=min(margins, key=lambda m: (m[1], m[0])) if margins else None,
            applicable=self.applicable or other.applicable,
            runtime_s=self.runtime_s + other.runtime_s,
            details={**self.details, **other.details},
        )


Envelope = Callable[[np.ndarray], np.ndarray]


def _spec_envelopes(spec: BoundSpec) -> tuple[Envelope, Envelope]:
    def upper(x):
        return x * (1 + spec.relative(x))

    def lower(x):
        return x * (1 - spec.relative(x))

    return upper, lower


class StepBoundChecker:
    """Sink checking lower(x) <= f(x) <= upper(x) for real x in [lo, hi].

    ``which`` selects f: ``"theta"`` or ``"psi"``.  Either envelope may be None.
    Strict inequalities are selected per side.
    """

    def __init__(
        self,
        check: str,
        which: str,
        lo: int,
        hi: int,
        upper: Envelope | None = None,
        lower: Envelope | None = None,
        strict_upper: bool = False,
        strict_lower: bool = False,
        spec: BoundSpec | None = None,
    ):
        if which not in ("theta", "psi"):
            raise ValueError(f"which must be 'theta' or 'psi', got {which!r}")
        self.check = check
        self.which = which
        self.lo, self.hi = lo, hi
        self.upper, self.lower = upper, lower
        self.strict_upper, self.strict_lower = strict_upper, strict_lower
        self.spec = spec
        self.prev: float | None = None
        self.prev_point: int | None = None
        self.lo_done = False
        self.violations: list[Violation] = []
        self.count = 0
        self.last: Violation | None = None
        self.worst: tuple[float, float] | None = None
        self.done = False
        self._t0 = time.perf_counter()

    # -- helpers ---------------------------------------------------------------

    def _clear_from_upper(self, x: float, value: float, next_jump: float) -> int:
        # violating set is [x, r) with upper(r) = value, cut at the next jump
        r = root_increasing(lambda t: float(self.upper(np.float64(t))) - value, x, next_jump)
        if self.strict_upper:
            return min(math.floor(r) + 1, math.ceil(next_jump))
        return math.ceil(r)

    def _record(self, v: Violation) -> None:
        self.count += 1
        self.last = v
        if len(self.violations) < MAX_STORED_VIOLATIONS:
            self.violations.append(v)

    def _record_many(self, idx: np.ndarray, make) -> None:
        """Record violations at ``idx``; only the stored ones and the last are materialised."""
        if idx.size == 0:
            return
        room = max(0, MAX_STORED_VIOLATIONS - len(self.violations))
        for j in idx[:room]:
            self.violations.append(make(j))
        self.count += int(idx.size)
        self.last = self.violations[-1] if idx.size <= room else make(idx[-1])

    def _margin(self, xs: np.ndarray, margins: np.ndarray) -> None:
        if xs.size:
            i = int(np.argmin(margins))
            cand = (float(xs[i]), float(margins[i]))
            if self.worst is None or cand[1] < self.worst[1]:
                self.worst = cand

    # -- sink ------------------------------------------------------------------

    def __call__(self, batch: Batch) -> None:
        if self.done:
            return
        if self.which == "theta":
            pts, vals, before = batch.primes, batch.theta_values, batch.theta_before
        else:
            pts, vals, before = batch.psi_points, batch.psi_values, batch.psi_before
        if self.prev is None:
            self.prev = before
        if pts.size:
            keep = pts <= self.hi
            pts, vals = pts[keep], vals[keep]

        if not self.lo_done and batch.hi > self.lo:
            self._check_lo(pts, vals)
        if pts.size:
            left = np.concatenate([[self.prev], vals[:-1]])
            self._check_jumps(pts, vals, left)
            self.prev = float(vals[-1])
            self.prev_point = int(pts[-1])
        if batch.hi > self.hi:
            self.done = True

    def _check_lo(self, pts: np.ndarray, vals: np.ndarray) -> None:
        self.lo_done = True
        i = int(np.searchsorted(pts, self.lo, side="right")) - 1
        if i >= 0 and pts[i] == self.lo:
            return  # the jump itself is checked with the rest
        value = float(vals[i]) if i >= 0 else self.prev
        if self.upper is not None:
            x = np.float64(self.lo)
            u = float(self.upper(x))
            bad = value >= u if self.strict_upper else value > u
            self._margin(np.array([self.lo]), np.array([u - value]))
            if bad:
                nxt = float(pts[i + 1]) if i + 1 < pts.size else float(self.hi + 1)
                self._record(Violation(float(self.lo), "upper", value, u, False, self._clear_from_upper(self.lo, value, nxt)))

    def _check_jumps(self, pts: np.ndarray, vals: np.ndarray, left: np.ndarray) -> None:
        x = pts.astype(np.float64)
        if self.upper is not None:
            sel = pts >= self.lo
            if sel.any():
                u = self.upper(x[sel])
                v = vals[sel]
                bad = v >= u if self.strict_upper else v > u
                self._margin(x[sel], u - v)
                idx = np.flatnonzero(bad)
                if idx.size:
                    xs = x[sel]
                    nxt = np.concatenate([x[1:], [float(self.hi + 1)]])[sel]

                    def make(j):
                        j = int(j)
                        return Violation(float(xs[j]), "upper", float(v[j]), float(u[j]), False,
                                         self._clear_from_upper(float(xs[j]), float(v[j]), float(nxt[j])))

                    self._record_many(idx, make)
        if self.lower is not None:
            sel = pts > self.lo
            if sel.any():
                lw = self.lower(x[sel])
                lv = left[sel]
                # f(p) > lower(x) for x < q  <=>  f(p) >= lower(q): strictness is immaterial here
                bad = lv < lw
                self._margin(x[sel], lv - lw)
                xs = x[sel]
                self._record_many(
                    np.flatnonzero(bad),
                    lambda j: Violation(float(xs[j]), "lower", float(lv[j]), float(lw[j]), True, int(xs[j])),
                )

    def finish(self) -> VerificationReport:
        # closed right end: lower check at x = hi with the last value
        if self.lower is not None and self.prev is not None and (self.prev_point or 0) < self.hi:
            x = np.float64(self.hi)
            lw = float(self.lower(x))
            bad = self.prev <= lw if self.strict_lower else self.prev < lw
            self._margin(np.array([self.hi]), np.array([self.prev - lw]))
            if bad:
                self._record(Violation(float(self.hi), "lower", self.prev, lw, False, self.hi + 1))
        if self.last is not None:
            threshold = self.last.clear_from
        else:
            threshold = self.lo
        return VerificationReport(
            check=self.check,
            lo=self.lo,
            hi=self.hi,
            spec=self.spec,
            violations=list(self.violations),
            violation_count=self.count,
            min_threshold=threshold,
            worst_margin=self.worst,
            runtime_s=time.perf_counter() - self._t0,
        )


def bound_checker(spec: BoundSpec, which: str, limit: int, lo: int = 2) -> StepBoundChecker | None:
    """Checker for |f(x) - x| <= x r(x); None when the spec's validity onset lies beyond ``limit``."""
    start = max(lo, math.ceil(spec.validity_threshold))
    if start > limit:
        return None
    upper, lower = _spec_envelopes(spec)
    return StepBoundChecker(f"{which}:{spec.kind}", which, start, limit, upper, lower, spec=spec)


def not_applicable(spec: BoundSpec, which: str, lo: int, limit: int) -> VerificationReport:
    return VerificationReport(
        check=f"{which}:{spec.kind}",
        lo=lo,
        hi=limit,
        spec=spec,
        min_threshold=None,
        applicable=False,
        details={"reason": f"bound applies only for x >= {spec.validity_threshold:.6g}"},
    )


def _check_limit(limit: int, store) -> None:
    if store is not None:
        top = store.latest()
        if top is None or top.x < limit:
            raise OutOfRangeError(f"limit {limit} exceeds the largest checkpoint {top.x if top else None}")


def verify_bound(limit: int, spec: BoundSpec, which: str = "theta", *, store=None, lo: int = 2, **scan_kwargs) -> VerificationReport:
    """Check |f(x) - x| <= spec(x) for all real x in [lo, limit], f = theta or psi.

    With a ``store`` the limit must already be covered by its checkpoints.
    """
    _check_limit(limit, store)
    checker = bound_checker(spec, which, limit, lo)
    if checker is None:
        return not_applicable(spec, which, lo, limit)
    scan(limit, checker, **scan_kwargs)
    return checker.finish()


def verify_bound_sharded(
    limit: int,
    spec: BoundSpec,
    which: str,
    starts: list[PrimeCheckpoint],
    **scan_kwargs,
) -> VerificationReport:
    """Verify shard by shard from the given checkpoints and merge.

    Shard k covers real x in [starts[k].x + 1, starts[k+1].x + 1] (the last one
    ends at ``limit``); adjacent shards share their boundary point.
    """
    cps = sorted(starts, key=lambda c: c.x)
    report = None
    for k, cp in enumerate(cps):
        lo = max(cp.x + 1, 2)
        hi = cps[k + 1].x + 1 if k + 1 < len(cps) else limit
        hi = min(hi, limit)
        if lo > hi:
            continue
        checker = bound_checker(spec, which, hi, lo)
        if checker is None:
            continue
        scan(hi, checker, start=None if cp.x < 2 else cp, cadence=None, **scan_kwargs)
        part = checker.finish()
        report = part if report is None else report.merge(part)
    return report if report is not None else not_applicable(spec, which, 2, limit)


def classical_checkers(limit: int) -> list[StepBoundChecker]:
    """theta(x) > 0.93x on [599, limit], psi(x) <= 1.04x on [2, limit], theta(t) < t on [2, limit]."""
    out = [
        StepBoundChecker("theta>0.93x", "theta", 599, limit, lower=lambda x: 0.93 * x, strict_lower=True),
        StepBoundChecker("psi<=1.04x", "psi", 2, limit, upper=lambda x: 1.04 * x),
        StepBoundChecker("theta<x", "theta", 2, min(limit, 10**8), upper=lambda x: x, strict_upper=True),
    ]
    return [c for c in out if c.lo <= c.hi]


def verify_classical(limit: int, *, store=None, **scan_kwargs) -> dict[str, VerificationReport]:
    _check_limit(limit, store)
    checkers = classical_checkers(limit)
    scan(limit, checkers, **scan_kwargs)
    return {c.check: c.finish() for c in checkers}


# --- pi - li ---------------------------------------------------------------------


class PiLiScanner:
    """Sink checking li(p_{k+1}) - k <= bound(p_k) on every prime gap [p_k, p_{k+1}).

    Valid as a check of |pi(x) - li(x)| <= bound(x) only where pi(x) < li(x);
    the scan also confirms k < li(p_k) at every prime up to its limit.
    """

    def __init__(self, limit: int, spec: BoundSpec | None = None):
        if limit > KOTNIK_LIMIT:
            raise DomainError("pi(x) < li(x) is only known for x <= 1e14")
        self.limit = limit
        self.spec = spec or BoundSpec.theorem2()
        self.prev_prime = 0
        self.pi_last = 0
        self.last_fail: tuple[int, int, int, float, float] | None = None
        self.fail_count = 0
        self.sign_ok = True
        self.worst: tuple[float, float] | None = None
        self._t0 = time.perf_counter()

    def _gaps(self, p: np.ndarray, q: np.ndarray, k: np.ndarray, li_q: np.ndarray) -> None:
        bound = p * self.spec.relative(p)
        excess = (li_q - k) - bound
        margin = -excess
        if margin.size:
            i = int(np.argmin(margin))
            if self.worst is None or margin[i] < self.worst[1]:
                self.worst = (float(p[i]), float(margin[i]))
        bad = np.flatnonzero(excess > 0)
        if bad.size:
            j = bad[-1]
            self.fail_count += int(bad.size)
            self.last_fail = (int(k[j]), int(p[j]), int(q[j]), float(li_q[j] - k[j]), float(bound[j]))

    def __call__(self, batch: Batch) -> None:
        primes = batch.primes[batch.primes <= self.limit]
        if primes.size == 0:
            return
        ks = batch.pi_values[: primes.size]
        li_p = analytic.li(primes.astype(np.float64))
        if np.any(ks >= li_p):
            self.sign_ok = False
        if self.prev_prime:
            p = np.concatenate([[self.prev_prime], primes[:-1]]).astype(np.float64)
            k = ks - 1
        else:
            p = primes[:-1].astype(np.float64)
            k = ks[:-1]
            primes = primes[1:]
            li_p = li_p[1:]
        self._gaps(p, primes.astype(np.float64), k.astype(np.float64), li_p)
        self.prev_prime = int(batch.primes[batch.primes <= self.limit][-1])
        self.pi_last = int(ks[-1])

    def finish(self) -> VerificationReport:
        # last partial gap [p_last, limit]
        if self.prev_prime and self.prev_prime < self.limit:
            k = self.pi_last
            self._gaps(np.array([float(self.prev_prime)]), np.array([float(self.limit)]),
                       np.array([float(k)]), np.array([analytic.li(float(self.limit))]))
        details = {"sign_assumption_holds": self.sign_ok, "failing_gaps": self.fail_count}
        if self.last_fail is not None:
            k, p, q, lhs, bound = self.last_fail
            threshold = q
            details.update(last_failing_gap=[p, q], last_failing_k=k,
                           threshold_prime_index=k + 1, threshold_prime_index_zero_based=k,
                           li_minus_pi=lhs, bound_at_gap_start=bound)
            viol = [Violation(float(q), "upper", lhs, bound, True, q)]
        else:
            threshold = 2
            viol = []
        return VerificationReport(
            check="pi-li:" + self.spec.kind,
            lo=2,
            hi=self.limit,
            spec=self.spec,
            violations=viol,
            violation_count=self.fail_count,
            min_threshold=threshold,
            worst_margin=self.worst,
            runtime_s=time.perf_counter() - self._t0,
            details=details,
        )


def theorem2_scan(limit: int, spec: BoundSpec | None = None, **scan_kwargs) -> VerificationReport:
    """Least x from which |pi(x) - li(x)| <= spec(x) holds on [x, limit] (spec defaults to the 0.2795 bound)."""
    scanner = PiLiScanner(limit, spec)
    scan(limit, scanner, **scan_kwargs)
    return scanner.finish()


# --- the pi - li certificate at x0 ------------------------------------------------


@dataclass(frozen=True)
class PiCertificate:
    x0: int
    bracket: float
    error_budget: float
    certified: bool
    constant: float
    pi_x0: int
    theta_x0: float


def pi2_certificate(x0: int, checkpoint: PrimeCheckpoint | None = None, *, quad_tol: float = 1e-6, R: float = analytic.R_DEFAULT) -> PiCertificate:
    """Evaluate the x-independent part of the pi - li estimate at x0.

    bracket = 2/log 2 - li(2) - x0 eps0(x0)/(log x0)^(33/20) + int_2^x0 dt/log^2 t - pi(x0) + theta(x0)/log x0.
    It certifies the estimate when bracket <= -(quad_tol + theta_err).  ``constant``
    is 1 + (log x0)^(-13/20), the factor multiplying x eps0(x)/log x for x >= x0.
    """
    if not 149 <= x0 <= 10**8:
        raise DomainError("x0 must lie in [149, 1e8]")
    if checkpoint is None:
        checkpoint = scan(x0, cadence=None)
    if checkpoint.x != x0:
        raise ValueError(f"checkpoint is at x={checkpoint.x}, not x0={x0}")
    L = math.log(x0)
    bracket = (
        2 / math.log(2)
        - analytic.li(2.0)
        - x0 * analytic.epsilon0(x0, R) / L ** (33 / 20)
        + analytic.inverse_log_square_integral(x0, quad_tol)
        - checkpoint.pi_x
        + checkpoint.theta_x / L
    )
    budget = quad_tol + checkpoint.theta_err
    return PiCertificate(
        x0=x0,
        bracket=bracket,
        error_budget=budget,
        certified=bracket <= -budget,
        constant=1 + L ** (-13 / 20),
        pi_x0=checkpoint.pi_x,
        theta_x0=checkpoint.theta_x,
    )
