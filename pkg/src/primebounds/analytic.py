"""Closed-form bound functions, the logarithmic integral, and derived constants.

Every function that depends on the zero-free-region constant takes ``R`` as a
parameter defaulting to 6.455.  Functions that would overflow for the huge
arguments the estimates are stated at (``e**1162`` and beyond) have ``*_log``
variants that take ``log x`` instead of ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .logscale import LogScaleNumber

R_DEFAULT = 6.455
R_SCHOENFELD = 9.6459
R_KADIRI = 5.69693
B_ZERO_FREE = 17.0
H_RH = 3.061e10
EPS0_COEFF = math.sqrt(8.0 / (17.0 * math.pi))

SCHOENFELD_SQRT_COEFF = 1.001093
SCHOENFELD_CBRT_COEFF = 3.0

THEOREM2_COEFF = 0.2795
DUSART_COEFF = 0.4394
DUSART_R = 9.696
LEMMA1_COEFF = 0.0045
PI2_CONSTANT = 1.151
FORD_NEW_COEFF = 0.56
FORD_OLD_COEFF = 0.44
FORD_OLD_RATE = 0.321979
RAMARE_SAOUTER_DELTA = 212215384.0
ALPHA_MAX = 1.75

EULER_GAMMA = 0.57721566490153286061


class DomainError(ValueError):
    """Argument outside the domain where a function or bound is defined."""


@dataclass(frozen=True)
class ZeroFreeParams:
    R: float
    B: float = B_ZERO_FREE
    R_kadiri: float = R_KADIRI
    H: float = H_RH
    t0: float = 24.0

    def __post_init__(self):
        if not self.R > self.R_kadiri:
            raise ValueError("R must exceed the Kadiri constant")
        if not self.H > self.B:
            raise ValueError("H must exceed B")


# --- the error envelope -----------------------------------------------------


def epsilon0_log(log_x, R: float = R_DEFAULT):
    """epsilon_0 as a function of ``log x``; accepts scalars or arrays."""
    X = np.sqrt(np.asarray(log_x, dtype=float) / R)
    out = EPS0_COEFF * np.sqrt(X) * np.exp(-X)
    return float(out) if out.ndim == 0 else out


def epsilon0(x, R: float = R_DEFAULT):
    """sqrt(8/(17 pi)) X^(1/2) e^(-X) with X = sqrt(log x / R), for x >= 2."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 2):
        raise DomainError("epsilon0 is defined for x >= 2")
    return epsilon0_log(np.log(arr), R)


def epsilon0_peak(R: float = R_DEFAULT) -> float:
    """Location x = e^(R/4) of the maximum of epsilon0 (where X = 1/2)."""
    return math.exp(R / 4)


def epsilon0_min_on(x_lo: float, x_hi: float, R: float = R_DEFAULT) -> float:
    """Minimum of epsilon0 on [x_lo, x_hi]; unimodality puts it at an endpoint."""
    return min(epsilon0(x_lo, R), epsilon0_log(math.log(x_hi), R))


# --- zero-free region ---------------------------------------------------------


def solve_zero_free_R(H: float = H_RH, R_kadiri: float = R_KADIRI, B: float = B_ZERO_FREE) -> float:
    """R with exp(R log B / (R - R_kadiri)) = H."""
    if not (B > 1 and R_kadiri > 0):
        raise ValueError("need B > 1 and R_kadiri > 0")
    lh, lb = math.log(H), math.log(B)
    if lh <= lb:
        raise DomainError(f"no admissible R: log H = {lh} does not exceed log B = {lb}")
    return R_kadiri * lh / (lh - lb)


def zero_free_height(R: float, R_kadiri: float = R_KADIRI, B: float = B_ZERO_FREE) -> float:
    """Height above which Kadiri's region implies the region with constant R and shift B."""
    if R <= R_kadiri:
        raise DomainError("R must exceed R_kadiri")
    return math.exp(R * math.log(B) / (R - R_kadiri))


# --- logarithmic integral -----------------------------------------------------


def li(x):
    """Principal-value logarithmic integral via the exponential-integral series.

    li(x) = gamma + log log x + sum_{n>=1} (log x)^n / (n n!), valid for x > 1.
    All series terms are positive there, so the sum loses no digits.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 1):
        raise DomainError("li is evaluated only for x > 1")
    u = np.log(arr)
    total = np.zeros_like(u)
    term = np.ones_like(u)
    n = 0
    while True:
        n += 1
        term = term * u / n
        contrib = term / n
        total += contrib
        if np.all(contrib <= 1e-17 * total):
            break
    out = EULER_GAMMA + np.log(u) + total
    return float(out) if out.ndim == 0 else out


# Gregory coefficients: 1/log(1+h) - 1/h = sum G_k h^k near h = 0.
_GREGORY = (1 / 2, -1 / 12, 1 / 24, -19 / 720, 3 / 160, -863 / 60480, 275 / 24192)


def _pv_regular_part(t: float) -> float:
    h = t - 1.0
    if abs(h) < 1e-2:
        return sum(c * h**k for k, c in enumerate(_GREGORY))
    if t == 0.0:
        return 1.0
    return 1.0 / math.log1p(h) - 1.0 / h


def li2_quadrature() -> float:
    """li(2) as PV integral of 1/log t over [0, 2].

    Subtracting 1/(t - 1), whose principal value over [0, 2] is zero, leaves a
    smooth integrand.
    """
    val, _ = integrate.quad(_pv_regular_part, 0.0, 2.0, epsabs=0.0, epsrel=2e-14, limit=200)
    return val


_LI2_CACHE: list[float] = []


def li_quadrature(x: float) -> float:
    """li(x) = li(2) + int_2^x dt / log t, by adaptive quadrature in u = log t."""
    if x <= 1:
        raise DomainError("li is evaluated only for x > 1")
    if not _LI2_CACHE:
        _LI2_CACHE.append(li2_quadrature())
    if x == 2.0:
        return _LI2_CACHE[0]
    if x < 2.0:
        # Integrate down from 2; the PV singularity at 1 is excluded by x > 1.
        part, _ = integrate.quad(lambda t: 1.0 / math.log(t), x, 2.0, epsabs=0.0, epsrel=2e-14, limit=200)
        return _LI2_CACHE[0] - part
    a, b = math.log(2.0), math.log(x)
    part, _ = integrate.quad(lambda u: math.exp(u) / u, a, b, epsabs=0.0, epsrel=2e-14, limit=400)
    return _LI2_CACHE[0] + part


def inverse_log_square_integral(x0: float, tol: float = 1e-6) -> float:
    """int_2^x0 dt / log^2 t by adaptive quadrature to absolute tolerance ``tol``."""
    if x0 < 2:
        raise DomainError("upper limit must be >= 2")
    a, b = math.log(2.0), math.log(x0)
    val, err = integrate.quad(lambda u: math.exp(u) / (u * u), a, b, epsabs=tol, epsrel=1e-13, limit=400)
    if err > tol:
        raise ArithmeticError(f"quadrature error estimate {err} exceeds tolerance {tol}")
    return val


def soldner_constant() -> float:
    """Root of li in (1, 2), by bisection on the series."""
    lo, hi = 1.2, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if li(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


# --- Schoenfeld-type constants ---------------------------------------------


def schoenfeld_A_log(log_x0: float) -> float:
    return SCHOENFELD_SQRT_COEFF * math.exp(-log_x0 / 2) + SCHOENFELD_CBRT_COEFF * math.exp(-2 * log_x0 / 3)


def schoenfeld_A(x0: float) -> float:
    """1.001093 x0^(-1/2) + 3 x0^(-2/3), the psi - theta ratio bound for x >= x0."""
    if x0 < 1:
        raise DomainError("x0 must be >= 1")
    return schoenfeld_A_log(math.log(x0))


def chain_factor(a: float, b: float, eps_add: float, R: float = R_DEFAULT) -> float:
    """(A(e^a) + eps_add) / epsilon0(e^b): the multiple of x epsilon0(x) bounding the error on [e^a, e^b]."""
    if a > b:
        raise ValueError("need a <= b")
    return (schoenfeld_A_log(a) + eps_add) / epsilon0_log(b, R)


def lemma_B(log_a: float, log_b: float, eps_psi: float) -> float:
    """Upper bound for |theta(x) - x| log^2 x / x on [e^log_a, e^log_b].

    ``eps_psi`` bounds |psi(x) - x| / x from e^log_a on; each term is then
    maximised at the right endpoint.
    """
    if not 0 < log_a <= log_b:
        raise ValueError("need 0 < log_a <= log_b")
    if eps_psi < 0:
        raise ValueError("eps_psi must be non-negative")
    L2 = log_b * log_b
    return eps_psi * L2 + SCHOENFELD_SQRT_COEFF * L2 * math.exp(-log_b / 2) + SCHOENFELD_CBRT_COEFF * L2 * math.exp(-2 * log_b / 3)



# --- bound specifications -----------------------------------------------------

BOUND_KINDS = ("epsilon0", "constant_ratio", "lemma1", "theorem2", "dusart")


@dataclass(frozen=True)
class BoundSpec:
    """A bound written as x * relative(x).

    For every kind but ``epsilon0`` the relative part is
    ``coefficient * log(x)**(-log_power) * exp(-sqrt(log(x) / R))``, with the
    exponential dropped when ``R`` is None.
    """

    kind: str
    coefficient: float
    R: float | None = None
    log_power: float = 0.0
    validity_threshold: float = 2.0

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.coefficient <= 0:
            raise ValueError("coefficient must be positive")

    @classmethod
    def epsilon0(cls, R: float = R_DEFAULT) -> "BoundSpec":
        return cls("epsilon0", EPS0_COEFF, R=R)

    @classmethod
    def constant_ratio(cls, coefficient: float, validity_threshold: float = 2.0) -> "BoundSpec":
        return cls("constant_ratio", coefficient, validity_threshold=validity_threshold)

    @classmethod
    def lemma1(cls, coefficient: float = LEMMA1_COEFF) -> "BoundSpec":
        return cls("lemma1", coefficient, log_power=2.0, validity_threshold=math.exp(35))

    @classmethod
    def theorem2(cls, R: float = R_DEFAULT, coefficient: float = THEOREM2_COEFF) -> "BoundSpec":
        return cls("theorem2", coefficient, R=R, log_power=0.75, validity_threshold=229)

    @classmethod
    def dusart(cls) -> "BoundSpec":
        return cls("dusart", DUSART_COEFF, R=DUSART_R, log_power=0.75, validity_threshold=59)

    def relative_log(self, log_x):
        """bound(x) / x as a function of log x."""
        L = np.asarray(log_x, dtype=float)
        if self.kind == "epsilon0":
            out = self.coefficient * np.sqrt(np.sqrt(L / self.R)) * np.exp(-np.sqrt(L / self.R))
        else:
            out = self.coefficient * L ** (-self.log_power)
            if self.R is not None:
                out = out * np.exp(-np.sqrt(L / self.R))
            out = out * np.ones_like(L)
        return float(out) if out.ndim == 0 else out

    def relative(self, x):
        return self.relative_log(np.log(np.asarray(x, dtype=float)))

    def __call__(self, x):
        return pnt_error_bound(x, self)


def pnt_error_bound(x, spec: BoundSpec):
    """Absolute bound value x * relative(x); refuses x below the spec's validity threshold."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < spec.validity_threshold):
        raise DomainError(f"{spec.kind} bound is only valid for x >= {spec.validity_threshold:g}")
    out = arr * spec.relative(arr)
    return float(out) if np.ndim(out) == 0 else out


# --- the smoothing function for the pi - li argument ------------------------------


def g_and_derivative(t: float, alpha: float = 1.4, R: float = R_DEFAULT) -> tuple[float, float]:
    """g(t) = t eps0(t) / log(t)^(alpha + 1/4) and its derivative.

    With L = log t and X = sqrt(L / R),
    g'(t) = eps0(t) L^(-beta) (1 + 1/(4L) - 1/(2 X R) - beta / L), beta = alpha + 1/4.
    """
    if alpha >= ALPHA_MAX:
        raise ValueError(f"alpha must be below {ALPHA_MAX}")
    if t < 149:
        raise DomainError("g is used for t >= 149")
    L = math.log(t)
    X = math.sqrt(L / R)
    beta = alpha + 0.25
    e0 = epsilon0_log(L, R)
    g = t * e0 * L**-beta
    gp = e0 * L**-beta * (1 + 1 / (4 * L) - 1 / (2 * X * R) - beta / L)
    return g, gp


def g_prime_margin_log(log_t, alpha: float = 1.4, R: float = R_DEFAULT):
    """g'(t) L^2 / eps0(t) - 1 as a function of L = log t; positive means eps0(t)/log^2 t < g'(t)."""
    L = np.asarray(log_t, dtype=float)
    X = np.sqrt(L / R)
    beta = alpha + 0.25
    return L ** (2 - beta) * (1 + 1 / (4 * L) - 1 / (2 * X * R) - beta / L) - 1


# --- prime-bearing intervals --------------------------------------------------------


def ford_interval_a_log(log_k: float, coeff: float = FORD_NEW_COEFF, R: float = R_DEFAULT, variant: str = "new") -> float:
    """log of the interval length a(k)."""
    if variant == "new":
        decay = math.sqrt(log_k / R)
    elif variant == "ford":
        decay = FORD_OLD_RATE * math.sqrt(log_k)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return math.log(coeff) + log_k + 0.25 * math.log(log_k) - decay


def ford_interval_a(k: float, coeff: float = FORD_NEW_COEFF, R: float = R_DEFAULT, variant: str = "new") -> float:
    """coeff k (log k)^(1/4) exp(-sqrt(log k / R)); ``variant='ford'`` uses exp(-0.321979 sqrt(log k))."""
    if k < 3:
        raise DomainError("k must be >= 3")
    return math.exp(ford_interval_a_log(math.log(k), coeff, R, variant))


def ford_crossover_log(new_coeff: float = FORD_NEW_COEFF, old_coeff: float = FORD_OLD_COEFF, R: float = R_DEFAULT) -> float:
    """log k beyond which the new interval is shorter than Ford's."""
    rate = 1 / math.sqrt(R) - FORD_OLD_RATE
    if rate <= 0:
        raise DomainError("new interval never becomes shorter")
    return (math.log(new_coeff / old_coeff) / rate) ** 2


def crossover_vs_fixed_delta(c: float, delta: float = RAMARE_SAOUTER_DELTA) -> LogScaleNumber:
    """x = exp(sqrt(delta / c)) past which 1/(c log^2 x) < 1/delta.

    Returned in log scale; the interesting values overflow a float.
    """
    if c <= 0 or delta <= 0:
        raise ValueError("c and delta must be positive")
    return LogScaleNumber(math.sqrt(delta / c))


# --- named constants -----------------------------------------------------------------

NAMED_CONSTANTS: list[tuple[str, float, str]] = [
    ("R0", R_SCHOENFELD, "Schoenfeld's zero-free constant in the original epsilon0"),
    ("R", R_DEFAULT, "zero-free constant used for epsilon0"),
    ("B", B_ZERO_FREE, "fixed shift in the zero-free region"),
    ("R_kadiri", R_KADIRI, "Kadiri's zero-free constant"),
    ("H", H_RH, "height to which RH is verified (Platt)"),
    ("theorem2_coefficient", THEOREM2_COEFF, "pi - li bound coefficient, x >= 229"),
    ("dusart_coefficient", DUSART_COEFF, "Dusart's pi - li bound coefficient, x >= 59"),
    ("dusart_R", DUSART_R, "Dusart's exponent constant"),
    ("lemma1_coefficient", LEMMA1_COEFF, "theta - x bound coefficient over log^2 x, x >= e^35"),
    ("pi2_constant", PI2_CONSTANT, "pi - li bound in units of x eps0(x)/log x, x >= 1e8"),
    ("interval_coefficient", FORD_NEW_COEFF, "prime-bearing interval coefficient, k >= e^280"),
    ("ford_coefficient", FORD_OLD_COEFF, "Ford's interval coefficient"),
    ("ford_rate", FORD_OLD_RATE, "Ford's decay rate"),
    ("pomerance_f_coefficient", 4 * THEOREM2_COEFF, "four times the pi - li coefficient"),
    ("h_coefficient", 1.7811, "coefficient of log log k in h(k)"),
    ("h_offset", 2.51, "coefficient of 1/log log k in h(k)"),
    ("delta_ramare_saouter", RAMARE_SAOUTER_DELTA, "relative interval length 1/Delta, x >= e^150"),
    ("short_interval_c", 111.0, "prime in [x, x(1 + 1/(c log^2 x))], x >= 2898239"),
    ("alpha", 1.4, "exponent in the smoothing function g"),
]
