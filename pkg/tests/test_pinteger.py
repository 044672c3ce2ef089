import math

import mpmath
import pytest
import sympy

from primebounds.analytic import THEOREM2_COEFF
from primebounds.pinteger import (
    POMERANCE_COEFF,
    ExclusionInputs,
    corollary3_certify,
    enumerate_p_integers,
    exclusion_sum,
    exclusion_sweep,
    h_and_L,
    is_p_integer,
    totient,
)
from primebounds.sieve import CapacityError


def brute_p_integer(k):
    units = {r for r in range(1, k) if math.gcd(r, k) == 1} if k > 2 else {1}
    phi = len(units)
    chosen, p = [], 1
    while len(chosen) < phi:
        p = sympy.nextprime(p)
        if k % p:
            chosen.append(p)
    return {p % k for p in chosen} == units


def test_examples():
    r12 = is_p_integer(12)
    assert r12.answer and r12.system == [5, 7, 11, 13]
    r10 = is_p_integer(10)
    assert not r10.answer
    assert r10.repeated_residue == 3 and r10.repeat_pair == (3, 13)
    r2 = is_p_integer(2)
    assert r2.answer and r2.system == [3]


def test_oracle_equivalence_up_to_1000():
    found = enumerate_p_integers(1000)
    assert found == [k for k in range(2, 1001) if brute_p_integer(k)]
    assert found == [2, 4, 6, 12, 18, 30]


def test_prime_k_skips_itself():
    # k = 7: primes 2, 3, 5, 11, 13, 17 -> residues 2, 3, 5, 4, 6, 3
    r = is_p_integer(7)
    assert not r.answer and r.repeat_pair == (3, 17)


def test_errors():
    with pytest.raises(ValueError):
        is_p_integer(1)
    with pytest.raises(CapacityError):
        is_p_integer(10**9)


def test_totient():
    for n in range(1, 300):
        assert totient(n) == sympy.totient(n)


def test_pomerance_coefficient():
    assert POMERANCE_COEFF == 4 * THEOREM2_COEFF
    assert POMERANCE_COEFF == pytest.approx(1.118, abs=1e-12)


def test_h_and_L():
    h, L = h_and_L(1805 * math.log(10))
    assert h == pytest.approx(15.14198, abs=1e-5)
    assert L == 273
    h35, L35 = h_and_L(3500 * math.log(10))
    assert h35 == pytest.approx(16.2993, abs=1e-4) and L35 == 493
    with pytest.raises(ValueError):
        h_and_L(2.0)
    # h is smallest where log log k = sqrt(2.51 / 1.7811)
    ll = math.sqrt(2.51 / 1.7811)
    hs = [h_and_L(math.exp(ll + d))[0] for d in (-1e-3, 0, 1e-3)]
    assert hs[1] < hs[0] and hs[1] < hs[2]


def mp_exclusion(log10_k, L):
    """f_0(k) + sum f_n(k) evaluated directly at k = 10**log10_k, divided by k."""
    mpmath.mp.dps = 60
    k = mpmath.mpf(10) ** log10_k
    lk, a = mpmath.log(k), mpmath.log(k / 2)
    f0 = k / a + k / a**2 + mpmath.mpf("1.8") * k / a**3 - k / lk - k / lk**2 - mpmath.mpf("2.51") * k / lk**3 - lk
    total = f0
    for n in range(1, L + 1):
        total += k / (4 * (n + 1) * mpmath.log(n * k + k) ** 2) - mpmath.mpf("1.118") * (n * k + k) / mpmath.log(n * k) ** 0.75 * mpmath.exp(-mpmath.sqrt(mpmath.log(n * k) / mpmath.mpf("6.455")))
    return total / k


@pytest.mark.parametrize("L", [0, 273, 1000])
def test_exclusion_sum_against_mpmath(L):
    res = exclusion_sum(ExclusionInputs(1805 * math.log(10), L))
    assert res.value == pytest.approx(float(mp_exclusion(1805, L)), rel=1e-9)
    assert res.positive


def test_exclusion_sum_continuity():
    base = exclusion_sum(ExclusionInputs(1805 * math.log(10), 273)).value
    moved = exclusion_sum(ExclusionInputs(1805 * math.log(10) + 1e-6, 273)).value
    assert abs(moved - base) < 1e-4 * abs(base)


def test_corollary_sweep():
    rep = corollary3_certify()
    assert (rep.L_min, rep.L_max) == (273, 3800)
    assert rep.all_positive
    assert rep.argmin_L == 3800
    assert rep.min_value == pytest.approx(float(mp_exclusion(1805, 3800)), rel=1e-8)
    assert rep.omitted_log_magnitude < math.log(1e-300)
    # cumulative sweep equals pointwise sums
    for L in (273, 500, 3800):
        assert rep.values[L - 273] == pytest.approx(exclusion_sum(ExclusionInputs(1805 * math.log(10), L)).value, rel=1e-12)


def test_sweep_other_regimes():
    assert exclusion_sweep(3500, 493, 1500).all_positive
    low = exclusion_sweep(100, 1, 50)
    assert low.omitted_log_magnitude is None  # (log k)/k is representable here
    with pytest.raises(ValueError):
        exclusion_sweep(1805, 10, 5)
    with pytest.raises(ValueError):
        ExclusionInputs(10.0, -1)
