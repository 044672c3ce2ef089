"""P-integers: exact decision for small k and the exclusion inequality for huge k.

k > 1 is a P-integer when the first phi(k) primes not dividing k hit every
unit residue class mod k exactly once.  For k near 10**1805 the exclusion test
is evaluated with every term divided by k, so only log k is ever needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import R_DEFAULT, THEOREM2_COEFF
from .logscale import LogScaleNumber
from .sieve import CapacityError, iter_batches

MAX_K = 10**8
POMERANCE_COEFF = 4 * THEOREM2_COEFF
H_LOGLOG_COEFF = 1.7811
H_INV_COEFF = 2.51
F0_PI_COEFF = 1.8
F0_PI_UPPER_COEFF = 2.51


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def totient(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def _nth_prime_upper(n: int) -> int:
    if n < 6:
        return 13
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 1


@dataclass
class PIntegerResult:
    k: int
    answer: bool
    phi: int
    system: list[int] | None = None
    repeated_residue: int | None = None
    repeat_pair: tuple[int, int] | None = None


def is_p_integer(k: int, max_k: int = MAX_K) -> PIntegerResult:
    """Decide whether k is a P-integer.

    Primes dividing k are skipped, including k itself when k is prime.  On
    failure the witness is the first repeated residue and the two primes that
    share it; on success it is the full list of phi(k) primes.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > max_k:
        raise CapacityError(f"k={k} exceeds the configured maximum {max_k}")
    phi = totient(k)
    divisors = factorize(k)
    limit = max(_nth_prime_upper(phi + len(divisors)), 13)
    seen = np.zeros(k, dtype=bool)
    chosen: list[np.ndarray] = []
    need = phi
    for batch in iter_batches(limit, cadence=None):
        ps = batch.primes
        if ps.size == 0:
            continue
        ps = ps[k % ps != 0][:need]
        res = ps % k
        first = np.zeros(res.size, dtype=bool)
        _, idx = np.unique(res, return_index=True)
        first[idx] = True
        dup = np.flatnonzero(~first | seen[res])
        if dup.size:
            j = int(dup[0])
            r = int(res[j])
            earlier = _first_prime_with_residue(k, r, chosen, ps[:j])
            return PIntegerResult(k, False, phi, repeated_residue=r, repeat_pair=(earlier, int(ps[j])))
        seen[res] = True
        chosen.append(ps)
        need -= ps.size
        if need == 0:
            system = [int(p) for c in chosen for p in c]
            return PIntegerResult(k, True, phi, system=system)
    raise RuntimeError("prime supply exhausted before phi(k) primes were found")


def _first_prime_with_residue(k: int, r: int, chosen: list[np.ndarray], tail: np.ndarray) -> int:
    for arr in chosen + [tail]:
        hit = np.flatnonzero(arr % k == r)
        if hit.size:
            return int(arr[hit[0]])
    raise AssertionError("repeated residue without an earlier prime")


def enumerate_p_integers(upto: int) -> list[int]:
    return [k for k in range(2, upto + 1) if is_p_integer(k).answer]


# --- the exclusion inequality ----------------------------------------------------------


def h_and_L(log_k: float) -> tuple[float, int]:
    """h(k) = 1.7811 log log k + 2.51 / log log k and the least admissible L."""
    if log_k <= math.e:
        raise ValueError("need log k > e")
    ll = math.log(log_k)
    h = H_LOGLOG_COEFF * ll + H_INV_COEFF / ll
    return h, math.ceil((log_k - math.log(h)) / h - 2)


@dataclass(frozen=True)
class ExclusionInputs:
    log_k: float
    L: int
    pi_lower_coeff: float = F0_PI_COEFF
    pi_upper_coeff: float = F0_PI_UPPER_COEFF
    pomerance_coeff: float = POMERANCE_COEFF
    R: float = R_DEFAULT

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("L must be >= 0")
        if self.log_k <= 0:
            raise ValueError("log_k must be positive")


def _f0_over_k(log_k: float, c_lo: float, c_hi: float) -> tuple[float, LogScaleNumber]:
    a = log_k - math.log(2)
    value = 1 / a + 1 / a**2 + c_lo / a**3 - 1 / log_k - 1 / log_k**2 - c_hi / log_k**3
    # the -log(k)/k term, kept as a magnitude since it underflows for log k > ~745
    tail = LogScaleNumber(math.log(log_k) - log_k)
    return value - tail.to_float(), tail


def _fn_over_k(log_k: float, n: np.ndarray, coeff: float, R: float) -> np.ndarray:
    log_nk = log_k + np.log(n)
    log_n1k = log_k + np.log(n + 1)
    return 1 / (4 * (n + 1) * log_n1k**2) - coeff * (n + 1) * log_nk**-0.75 * np.exp(-np.sqrt(log_nk / R))


@dataclass
class ExclusionResult:
    value: float
    positive: bool
    omitted_log_magnitude: float | None


def exclusion_sum(inputs: ExclusionInputs) -> ExclusionResult:
    """(f_0(k) + sum_{n=1}^{L} f_n(k)) / k from log k alone."""
    f0, tail = _f0_over_k(inputs.log_k, inputs.pi_lower_coeff, inputs.pi_upper_coeff)
    n = np.arange(1, inputs.L + 1, dtype=np.float64)
    total = f0 + float(np.sum(_fn_over_k(inputs.log_k, n, inputs.pomerance_coeff, inputs.R)))
    omitted = tail.log_value if tail.to_float() == 0.0 else None
    positive = total > 0 and (omitted is None or math.log(total) > omitted)
    return ExclusionResult(total, positive, omitted)


@dataclass
class SweepReport:
    log10_k: float
    L_min: int
    L_max: int
    min_value: float
    argmin_L: int
    all_positive: bool
    omitted_log_magnitude: float | None
    values: np.ndarray = field(repr=False, default=None)


def exclusion_sweep(log10_k: float, L_min: int, L_max: int, **consts) -> SweepReport:
    """exclusion_sum for every L in [L_min, L_max] via one cumulative sum."""
    if not 0 <= L_min <= L_max:
        raise ValueError("need 0 <= L_min <= L_max")
    base = ExclusionInputs(log10_k * math.log(10), L_max, **consts)
    f0, tail = _f0_over_k(base.log_k, base.pi_lower_coeff, base.pi_upper_coeff)
    n = np.arange(1, L_max + 1, dtype=np.float64)
    partial = np.concatenate([[0.0], np.cumsum(_fn_over_k(base.log_k, n, base.pomerance_coeff, base.R))])
    values = f0 + partial[L_min:]
    omitted = tail.log_value if tail.to_float() == 0.0 else None
    i = int(np.argmin(values))
    ok = bool(np.all(values > 0))
    if ok and omitted is not None:
        ok = math.log(float(values[i])) > omitted
    return SweepReport(log10_k, L_min, L_max, float(values[i]), L_min + i, ok, omitted, values)


def corollary3_certify(log10_k: float = 1805, L_min: int | None = None, L_max: int = 3800) -> SweepReport:
    """Sweep the exclusion inequality over L in [L_min, L_max] at k = 10**log10_k.

    L_min defaults to the least admissible L from h_and_L.
    """
    if L_min is None:
        L_min = h_and_L(log10_k * math.log(10))[1]
    return exclusion_sweep(log10_k, L_min, L_max)
