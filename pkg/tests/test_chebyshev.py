import math
import random

import mpmath
import numpy as np
import pytest

from primebounds import analytic
from primebounds.analytic import BoundSpec, DomainError
from primebounds.chebyshev import (
    MAX_STORED_VIOLATIONS,
    StepBoundChecker,
    PiLiScanner,
    pi2_certificate,
    theorem2_scan,
    verify_bound,
    verify_bound_sharded,
    verify_classical,
)
from primebounds.sieve import PrimeCheckpoint, scan, small_primes



def _eps0(x):
    X = mpmath.sqrt(mpmath.log(x) / mpmath.mpf("6.455"))
    return mpmath.sqrt(8 / (17 * mpmath.pi)) * mpmath.sqrt(X) * mpmath.exp(-X)


def integer_oracle(limit, which):
    """Least integer t with |f(x) - x| <= x eps0(x) for all real x in [t, limit].

    f is constant on [n, n+1): the upper envelope binds at n, the lower one as x -> n+1.
    """
    ps = set(small_primes(limit + 1).tolist())
    f = mpmath.mpf(0)
    last_bad = None
    for n in range(2, limit + 1):
        if which == "theta":
            if n in ps:
                f += mpmath.log(n)
        else:
            for p in ps:
                if p > n:
                    break
            f = sum(mpmath.log(p) * int(mpmath.floor(mpmath.log(n) / mpmath.log(p) + mpmath.mpf(10) ** -20))
                    for p in sorted(ps) if p <= n)
        top = min(n + 1, limit)
        up_bad = f > n * (1 + _eps0(n))
        lo_bad = f < top * (1 - _eps0(top))
        if up_bad or lo_bad:
            last_bad = n
    return 2 if last_bad is None else last_bad + 1


def test_theta_threshold_matches_oracle():
    assert verify_bound(3000, BoundSpec.epsilon0(), "theta").min_threshold == integer_oracle(3000, "theta") == 127


def test_psi_threshold_matches_oracle():
    assert verify_bound(400, BoundSpec.epsilon0(), "psi").min_threshold == integer_oracle(400, "psi") == 23


def test_theta_margins_near_127_and_149():
    th = {p: float(mpmath.fsum(mpmath.log(q) for q in small_primes(p - 1).tolist())) for p in (127, 149)}
    m127 = th[127] - 127 * (1 - float(_eps0(127)))
    m149 = th[149] - 149 * (1 - float(_eps0(149)))
    assert m127 == pytest.approx(-0.69, abs=0.01)
    assert m149 == pytest.approx(0.078, abs=0.001)
    rep = verify_bound(10**6, BoundSpec.epsilon0(), "theta")
    last = rep.violations[-1]
    assert (last.x, last.side, last.left_limit) == (127.0, "lower", True)


def test_theta_threshold_1e8():
    rep = verify_bound(10**8, BoundSpec.epsilon0(), "theta")
    assert rep.min_threshold == 127
    assert rep.violation_count == len(rep.violations)


@pytest.mark.parametrize("R,expected", [(6.0, 149), (6.3, 149), (6.35, 127), (6.455, 127), (9.6459, 101)])
def test_theta_threshold_depends_on_R(R, expected):
    # 149 appears only once R drops to about 6.3; at R = 6.455 the last failure is 127-
    assert verify_bound(10**5, BoundSpec.epsilon0(R), "theta").min_threshold == expected


def test_psi_threshold_1e8():
    assert verify_bound(10**8, BoundSpec.epsilon0(), "psi").min_threshold == 23


def test_lemma1_not_applicable_below_e35():
    rep = verify_bound(10**6, BoundSpec.lemma1(), "theta")
    assert not rep.applicable and rep.min_threshold is None


def test_constant_ratio_bound():
    rep = verify_bound(10**6, BoundSpec.constant_ratio(0.05), "theta")
    # theta(x) >= 0.95 x from some point below 10**4 on
    assert 2 < rep.min_threshold < 10**4
    assert rep.violation_count > 0


def test_sharded_equals_single_pass_and_merge_order_independent():
    spec = BoundSpec.epsilon0()
    cps = [PrimeCheckpoint.origin(), scan(50), scan(130), scan(5000)]
    full = verify_bound(20000, spec, "theta")
    sharded = verify_bound_sharded(20000, spec, "theta", cps)
    assert sharded.min_threshold == full.min_threshold == 127
    full_x = {v.x for v in full.violations}
    shard_x = {v.x for v in sharded.violations}
    # a shard's closed right end may add a point already covered by the next jump's left limit
    assert full_x <= shard_x and shard_x - full_x <= {51.0, 131.0, 5001.0}
    parts = []
    for a, b in [(2, 60), (60, 140), (140, 20000)]:
        chk = StepBoundChecker("t", "theta", a, b, *_env(spec), spec=spec)
        scan(b, chk)
        parts.append(chk.finish())
    random.seed(1)
    counts = set()
    for _ in range(6):
        random.shuffle(parts)
        m = parts[0].merge(parts[1]).merge(parts[2])
        assert m.min_threshold == 127
        counts.add((m.violation_count, tuple(v.x for v in m.violations)))
    assert len(counts) == 1


def _env(spec):
    return (lambda x: x * (1 + spec.relative(x)), lambda x: x * (1 - spec.relative(x)))


def test_violation_storage_is_capped():
    spec = BoundSpec.constant_ratio(1e-6)
    rep = verify_bound(10**5, spec, "theta")
    assert rep.violation_count > MAX_STORED_VIOLATIONS == len(rep.violations)
    assert rep.min_threshold > 10**5  # never satisfied


def test_classical_bounds_clean():
    reps = verify_classical(10**7)
    assert set(reps) == {"theta>0.93x", "psi<=1.04x", "theta<x"}
    assert all(r.clean for r in reps.values())


def test_classical_detects_violation_below_599():
    chk = StepBoundChecker("t", "theta", 2, 598, lower=lambda x: 0.93 * x, strict_lower=True)
    scan(598, chk)
    assert not chk.finish().clean


def _li_pi_oracle(limit):
    ps = small_primes(limit + 500).tolist()
    spec = BoundSpec.theorem2()
    last = None
    for k in range(1, len(ps)):
        p, q = ps[k - 1], ps[k]
        if p > limit:
            break
        q_eff = min(q, limit)
        if float(mpmath.li(q_eff)) - k > p * spec.relative(p):
            last = q_eff
    return last


def test_theorem2_threshold_against_oracle():
    rep = theorem2_scan(10**4)
    assert rep.min_threshold == _li_pi_oracle(10**4) == 227
    d = rep.details
    assert d["last_failing_gap"] == [223, 227]
    assert d["threshold_prime_index"] == 49
    assert d["threshold_prime_index_zero_based"] == 48
    assert d["sign_assumption_holds"]


def test_theorem2_scan_1e6():
    rep = theorem2_scan(10**6)
    assert rep.min_threshold == 227
    assert analytic.li(1e6) - 78498 == pytest.approx(129.55, abs=0.01)
    assert analytic.li(1e6) - 78498 < analytic.pnt_error_bound(1e6, BoundSpec.theorem2())


def test_theorem2_refuses_beyond_known_sign_range():
    with pytest.raises(DomainError):
        PiLiScanner(10**15)


def test_pi2_certificate():
    cert = pi2_certificate(10**8)
    assert cert.certified
    assert cert.bracket == pytest.approx(-75799.59, abs=0.01)
    assert cert.constant == pytest.approx(1 + math.log(1e8) ** -0.65, rel=1e-15)
    assert cert.constant <= 1.151
    assert cert.pi_x0 == 5761455
    with pytest.raises(DomainError):
        pi2_certificate(100)
    with pytest.raises(DomainError):
        pi2_certificate(10**9)
    with pytest.raises(ValueError):
        pi2_certificate(1000, scan(999))


def test_checker_rejects_unknown_function():
    with pytest.raises(ValueError):
        StepBoundChecker("x", "pi", 2, 10)
