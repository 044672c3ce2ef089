"""Bisection helpers for monotone predicates and increasing functions."""
from __future__ import annotations

from typing import Callable


def least_integer_where(pred: Callable[[int], bool], lo: int, hi: int | None = None) -> int:
    """Least integer n >= lo with pred(n), for pred monotone (False ... False True ... True).

    Without ``hi`` the upper end is found by doubling.
    """
    if pred(lo):
        return lo
    if hi is None:
        step = 1
        hi = lo + step
        while not pred(hi):
            lo = hi
            step *= 2
            hi = lo + step
    elif not pred(hi):
        raise ValueError(f"predicate is false at the upper end {hi}")
    # invariant: pred(lo) is False, pred(hi) is True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def root_increasing(f: Callable[[float], float], a: float, b: float, iters: int = 200) -> float:
    """Point where an increasing f crosses zero in [a, b]; clamps to the ends when it does not."""
    if f(a) >= 0:
        return a
    if f(b) <= 0:
        return b
    for _ in range(iters):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f(m) < 0:
            a = m
        else:
            b = m
    return b
