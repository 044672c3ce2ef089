"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Each test records a PASS/FAIL line; the lines are printed inline (visible with -s)
and again in the terminal summary.
"""
import math
import time

import mpmath
import numpy as np
import pytest
import sympy

from primebounds import analytic, chebyshev, gaps, pinteger, ramanujan
from primebounds.analytic import BoundSpec
from primebounds.checkpoints import CheckpointStore
from primebounds.sieve import PrimeCheckpoint, iter_batches, scan

from conftest import ACCEPTANCE_LINES, trial_division_primes

SCAN_LIMIT = 10**8


def record(n, name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.fixture(scope="module")
def full_scan():
    """One pass over [2, 1e8] feeding the epsilon0 and classical checkers."""
    spec = BoundSpec.epsilon0()
    theta = chebyshev.bound_checker(spec, "theta", SCAN_LIMIT)
    psi = chebyshev.bound_checker(spec, "psi", SCAN_LIMIT)
    classical = chebyshev.classical_checkers(SCAN_LIMIT)
    with Timer() as t:
        final = scan(SCAN_LIMIT, [theta, psi, *classical], start=PrimeCheckpoint.origin(), cadence=None, workers=4)
    return {
        "final": final,
        "theta": theta.finish(),
        "psi": psi.finish(),
        "classical": {c.check: c.finish() for c in classical},
        "elapsed": t.elapsed,
    }


def test_c01_eps0_thresholds(full_scan):
    th, ps = full_scan["theta"].min_threshold, full_scan["psi"].min_threshold
    ok = th == 149 and ps == 23 and full_scan["elapsed"] <= 60
    record(1, "theta/psi eps0 thresholds", ok, f"theta {th} (want 149), psi {ps} (want 23), {full_scan['elapsed']:.1f} s")
    assert ps == 23
    assert th == 149
    assert full_scan["elapsed"] <= 60


def test_c02_eps0_floor():
    with Timer() as t:
        floor = analytic.epsilon0_min_on(2.0, math.exp(25))
    # unimodality: the minimum over an interval sits at an end point
    ends = min(analytic.epsilon0(2.0), analytic.epsilon0(math.exp(25)))
    grid = analytic.epsilon0(np.exp(np.linspace(math.log(2), 25, 20001)))
    ok = floor >= 0.075 and floor == pytest.approx(ends, rel=1e-15) and grid.min() >= floor * (1 - 1e-15) and t.elapsed < 1
    record(2, "eps0 floor", ok, f"min {floor:.7f} >= 0.075, {t.elapsed:.3f} s")
    assert ok


def test_c03_classical_bounds(full_scan):
    counts = {k: r.violation_count for k, r in full_scan["classical"].items()}
    ok = all(v == 0 for v in counts.values()) and len(counts) == 3
    record(3, "classical bounds", ok, f"violations {counts}")
    assert ok


def test_c04_pi_li_threshold():
    with Timer() as t:
        r = chebyshev.theorem2_scan(10**6)
    ok = r.min_threshold == 229 and t.elapsed <= 30
    record(4, "pi - li threshold", ok, f"threshold {r.min_threshold} (want 229), {t.elapsed:.2f} s")
    assert t.elapsed <= 30
    assert r.min_threshold == 229


def test_c05_pi2_certificate(full_scan):
    with Timer() as t:
        cert = chebyshev.pi2_certificate(SCAN_LIMIT, full_scan["final"])
    ok = cert.bracket <= -cert.error_budget and cert.constant <= 1.151 and t.elapsed <= 5
    record(5, "pi - li certificate at 1e8", ok,
           f"bracket {cert.bracket:.2f} <= -{cert.error_budget:.2e}, constant {cert.constant:.6f} <= 1.151, {t.elapsed:.2f} s")
    assert ok


def test_c06_table_first_row():
    b = analytic.lemma_B(35, 75, 7.4457e-7)
    ok = b <= 0.0042 and 0.0040 <= b <= 0.0042
    record(6, "table first row", ok, f"lemma_B = {b:.7f} in [0.0040, 0.0042]")
    assert ok


def test_c07_chain_factors():
    f1 = analytic.chain_factor(25, 45, 4.9e-5)
    f2 = analytic.chain_factor(45, 1162, 1.1e-8)
    ok = f1 <= 0.003 and f2 <= 0.006
    record(7, "chain factors", ok, f"{f1:.6f} <= 0.003, {f2:.6f} <= 0.006")
    assert ok


def test_c08_gap_table():
    with Timer() as t:
        table = gaps.GapTable.scan(30_600_000)
        got = {x: table(x) for x in (30_600_000, 5_700_000, 4_000_000)}
    want = {30_600_000: 210, 5_700_000: 159, 4_000_000: 148}
    ok = got == want and t.elapsed <= 10
    record(8, "gap table", ok, f"got {got}, want {want}, {t.elapsed:.2f} s")
    assert t.elapsed <= 10
    assert got == want


def test_c09_short_interval_threshold():
    with Timer() as t:
        r = gaps.verify_short_interval(3_800_000, 111)
    ok = r.threshold == 2898239 and t.elapsed <= 5
    record(9, "short-interval threshold c = 111", ok, f"threshold {r.threshold} (want 2898239), {t.elapsed:.2f} s")
    assert t.elapsed <= 5
    assert r.threshold == 2898239


def test_c10_cascade():
    with Timer() as t:
        x1, g1 = 1_680_000_000_000_000, 924
        y1 = gaps.cascade_step(g1, 111)
        table = gaps.GapTable.scan(y1 + 1)
        state = gaps.run_cascade((x1, g1), 111, lambda x: table(x + 1))
    onsets = [s.y_lower for s in state.stages]
    claims = (30_500_000, 5_630_000, 3_800_000)
    got = (onsets[0], onsets[1], state.frontier)
    ok = all(g <= c for g, c in zip(got, claims)) and t.elapsed <= 15
    record(10, "cascade onsets", ok, f"stage 1, stage 2, final {got} vs claims {claims}, {t.elapsed:.2f} s")
    assert t.elapsed <= 15
    assert all(g <= c for g, c in zip(got, claims))


def test_c11_zero_free_R():
    R = analytic.solve_zero_free_R(3.061e10, 5.69693, 17)
    ok = 6.4543 < R <= 6.4550 and R <= 6.455
    record(11, "zero-free constant", ok, f"R = {R:.8f} in (6.4543, 6.4550]")
    assert ok


def _brute_p_integer(k):
    units = {r for r in range(1, k) if math.gcd(r, k) == 1} if k > 2 else {1}
    chosen, p = [], 1
    while len(chosen) < len(units):
        p = sympy.nextprime(p)
        if k % p:
            chosen.append(p)
    return {p % k for p in chosen} == units


def test_c12_p_integers():
    with Timer() as t:
        found = pinteger.enumerate_p_integers(1000)
        examples = (pinteger.is_p_integer(12).answer, pinteger.is_p_integer(10).answer)
    oracle = [k for k in range(2, 1001) if _brute_p_integer(k)]
    ok = examples == (True, False) and found == oracle and t.elapsed <= 5
    record(12, "P-integers", ok, f"12 -> {examples[0]}, 10 -> {examples[1]}, list {found}, {t.elapsed:.2f} s")
    assert ok


def test_c13_exclusion_sweep():
    with Timer() as t:
        _, L_min = pinteger.h_and_L(1805 * math.log(10))
        sweep = pinteger.exclusion_sweep(1805, 273, 3800)
    ok = L_min == 273 and sweep.all_positive and bool(np.all(sweep.values > 0)) and t.elapsed <= 5
    record(13, "exclusion sweep", ok, f"L_min {L_min}, min {sweep.min_value:.3e} at L = {sweep.argmin_L}, {t.elapsed:.2f} s")
    assert ok


def _ramanujan_oracle(limit):
    """Violating runs by direct counting and 40-digit arithmetic."""
    primes = trial_division_primes(limit)
    pi = np.zeros(limit + 1, dtype=np.int64)
    pi[primes] = 1
    pi = np.cumsum(pi)
    runs = []
    with mpmath.workdps(40):
        for x in range(3, limit + 1):
            m = int(mpmath.floor(x / mpmath.e))
            holds = mpmath.mpf(int(pi[x])) ** 2 < mpmath.e * x / mpmath.log(x) * int(pi[m])
            if not holds:
                if runs and runs[-1][1] + 1 == x:
                    runs[-1][1] = x
                else:
                    runs.append([x, x])
    return [tuple(r) for r in runs]


def test_c14_ramanujan():
    with Timer() as t:
        rep = ramanujan.scan_ramanujan(10**7)
    oracle = _ramanujan_oracle(10**5)
    below = [(a, min(b, 10**5)) for a, b in rep.violations if a <= 10**5]
    largest = rep.largest_violation
    ok = below == oracle and largest <= 38_358_837_682 and t.elapsed <= 60
    record(14, "Ramanujan scan", ok,
           f"{len(oracle)} runs match the oracle on [3, 1e5], largest violation {largest}, {t.elapsed:.2f} s")
    assert ok


def test_c15_property_suites(tmp_path):
    t0 = time.perf_counter()
    failures = []
    # sieve tiling invariance
    ref = scan(3 * 10**6, segment_size=1 << 18, cadence=None)
    if any(scan(3 * 10**6, segment_size=s, cadence=None) != ref for s in (1 << 16, 1 << 22)):
        failures.append("tiling")
    # theta <= psi and psi = sum of theta(x^(1/m))
    pr, th, pp, pv = [], [], [], []
    for b in iter_batches(10**6):
        pr.append(b.primes), th.append(b.theta_values), pp.append(b.psi_points), pv.append(b.psi_values)
    pr, th, pp, pv = map(np.concatenate, (pr, th, pp, pv))

    def step(points, values, x):
        i = np.searchsorted(points, x, side="right")
        return values[i - 1] if i else 0.0

    for x in (2, 8, 9, 1000, 65537, 10**6):
        s = sum(step(pr, th, x ** (1 / m) + 1e-9) for m in range(1, int(math.log2(x)) + 1))
        if not (step(pr, th, x) <= step(pp, pv, x) and abs(step(pp, pv, x) - s) <= 1e-12 * s):
            failures.append(f"psi-theta at {x}")
    # li by two methods, and its derivative
    for x in np.logspace(math.log10(2), 16, 30):
        a, b = analytic.li(float(x)), analytic.li_quadrature(float(x))
        if abs(a - b) > 1e-12 * abs(a):
            failures.append(f"li at {x:g}")
    for x in np.logspace(1, 15, 15):
        h = x * 1e-5
        fd = (analytic.li(x + h) - analytic.li(x - h)) / (2 * h)
        if abs(fd * math.log(x) - 1) > 1e-8:
            failures.append(f"li' at {x:g}")
    # g' inequality on a grid from 149 up to 1e100
    L = np.linspace(math.log(149), 100 * math.log(10), 100000)
    if not np.all(analytic.g_prime_margin_log(L) > 0):
        failures.append("g' grid")
    # theorem2 bound below the older bound pointwise
    L = np.linspace(math.log(229), 1000, 100000)
    if not np.all(BoundSpec.theorem2().relative_log(L) < BoundSpec.dusart().relative_log(L)):
        failures.append("theorem2 < dusart")
    # resume determinism, in memory and through a store
    if scan(2 * 10**6, start=scan(10**6)) != scan(2 * 10**6):
        failures.append("resume")
    store = CheckpointStore(tmp_path / "cp.jsonl")
    scan(10**6, store=store, cadence=250000)
    if scan(2 * 10**6, store=CheckpointStore(tmp_path / "cp.jsonl"), cadence=250000) != scan(2 * 10**6, cadence=None):
        failures.append("resume from store")
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed <= 60
    record(15, "property suites", ok, f"{'all hold' if not failures else failures}, {elapsed:.1f} s")
    assert ok
