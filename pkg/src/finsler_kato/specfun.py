"""Real Gamma, digamma and the Gauss hypergeometric function on [0, 1).

The hypergeometric evaluator sums the Gauss series directly for y <= 0.5 and
switches to the 1 - y connection formulas above that.  When c - a - b is an
integer the connection coefficients have Gamma poles, so the logarithmic
forms of the connection formulas are used instead.  Everything is plain
double precision.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConvergenceError, DomainError, ParameterError, PoleError

__all__ = [
    "BoundaryClass",
    "BoundaryKind",
    "HypergeomParams",
    "boundary_class",
    "digamma",
    "gamma",
    "hyp2f1_connection",
    "hyp2f1_series",
    "hypergeom",
    "hypergeom_derivative",
    "rgamma",
]

POLE_TOL = 1e-14
# c - a - b closer than this to an integer takes the logarithmic branch
INTEGER_SNAP = 1e-12
SERIES_SWITCH = 0.5
SERIES_RTOL = 1e-16
SERIES_QUIET_TERMS = 3
MAX_TERMS = 100_000

_EULER_GAMMA = 0.57721566490153286061
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic series
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _is_nonpositive_integer(x, tol=POLE_TOL):
    return x <= tol and abs(x - round(x)) <= tol


def gamma(x):
    """Gamma function of a real argument.

    Raises PoleError at 0, -1, -2, ... (within 1e-14).
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x={x!r}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split the power so t**(x+1/2) cannot overflow before exp(-t) scales it
    half = t ** (0.5 * (x + 0.5))
    return _SQRT_2PI * half * math.exp(-t) * half * acc


def rgamma(x):
    """Reciprocal Gamma 1/Gamma(x); zero at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if x < 0.5:
        return math.sin(math.pi * x) * gamma(1.0 - x) / math.pi
    try:
        return 1.0 / gamma(x)
    except OverflowError:
        return 0.0


def digamma(x):
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma has a pole at x={x!r}")
    if x < 0.5:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coef in _DIGAMMA_ASYMPTOTIC:
        series += coef * power
        power *= inv2
    return shift + math.log(x) - 0.5 / x - series


@dataclass(frozen=True)
class HypergeomParams:
    """Parameters (a, b, c) of the Gauss series F(a, b, c; y)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if _is_nonpositive_integer(self.c):
            raise ParameterError(f"c={self.c!r} is zero or a negative integer")

    @property
    def excess(self):
        """c - a - b, the exponent governing the behaviour at y = 1."""
        return self.c - self.a - self.b

    @property
    def terminating(self):
        return _is_nonpositive_integer(self.a) or _is_nonpositive_integer(self.b)

    def shifted(self, by=1):
        return HypergeomParams(self.a + by, self.b + by, self.c + by)


def _params(p):
    if isinstance(p, HypergeomParams):
        return p
    a, b, c = p
    return HypergeomParams(float(a), float(b), float(c))


def _check_domain(y):
    y = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < 0.0) or np.any(y >= 1.0):
        raise DomainError("hypergeometric argument must satisfy 0 <= y < 1")
    return y


def _out(result, scalar):
    return float(result) if scalar else result


class _Accumulator:
    """Neumaier-compensated running sum over numpy arrays."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, term):
        t = self.total + term
        big = np.abs(self.total) >= np.abs(term)
        self.comp += np.where(big, (self.total - t) + term, (term - t) + self.total)
        self.total = t

    @property
    def value(self):
        return self.total + self.comp


def _sum_series(first, next_term, shape, max_terms, what):
    """Sum terms produced by ``next_term(n, previous)`` until they go quiet.

    Stops once every element has seen SERIES_QUIET_TERMS consecutive terms
    below SERIES_RTOL relative to its partial sum.
    """
    acc = _Accumulator(shape)
    term = first
    acc.add(term)
    quiet = np.zeros(shape, dtype=int)
    for n in range(max_terms):
        term = next_term(n, term)
        acc.add(term)
        small = np.abs(term) <= SERIES_RTOL * np.abs(acc.total)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= SERIES_QUIET_TERMS):
            return acc.value
    raise ConvergenceError(f"{what}: tail bound not met within {max_terms} terms")


def hyp2f1_series(p, y, max_terms=MAX_TERMS):
    """F(a, b, c; y) by direct summation of the Gauss series.

    Valid for any 0 <= y < 1 but slow as y -> 1; ``hypergeom`` only uses it
    up to y = 0.5.
    """
    p = _params(p)
    scalar = np.ndim(y) == 0
    y = _check_domain(y)
    a, b, c = p.a, p.b, p.c

    def step(n, term):
        return term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * y

    result = _sum_series(np.ones(y.shape), step, y.shape, max_terms, "Gauss series")
    return _out(result, scalar)


def _log_connection(a, b, c, m, u):
    """F(a, b, a+b-m; 1-u) for integer m >= 0 (logarithmic case).

    Uses the classical expansions around z = 1 for c = a + b - m.
    """
    log_u = np.log(u)
    shape = u.shape
    if m == 0:
        prefactor = gamma(c) * rgamma(a) * rgamma(b)
        coef = 1.0
        psi1, psia, psib = -_EULER_GAMMA, digamma(a), digamma(b)
        acc = _Accumulator(shape)
        power = np.ones(shape)
        quiet = np.zeros(shape, dtype=int)
        for n in range(MAX_TERMS):
            term = coef * (2.0 * psi1 - psia - psib - log_u) * power
            acc.add(term)
            small = np.abs(term) <= SERIES_RTOL * np.abs(acc.total)
            quiet = np.where(small, quiet + 1, 0)
            if np.all(quiet >= SERIES_QUIET_TERMS):
                return prefactor * acc.value
            coef *= (a + n) * (b + n) / ((n + 1.0) ** 2)
            psi1 += 1.0 / (n + 1.0)
            psia += 1.0 / (a + n)
            psib += 1.0 / (b + n)
            power = power * u
        raise ConvergenceError("logarithmic connection series did not converge")

    gc = gamma(c)
    # finite part: Gamma(m) / (Gamma(a) Gamma(b)) u^-m sum_{n<m} ...
    finite = np.zeros(shape)
    coef = 1.0
    power = np.ones(shape)
    for n in range(m):
        finite = finite + coef * power
        if n + 1 < m:
            coef *= (a - m + n) * (b - m + n) / ((n + 1.0) * (1.0 - m + n))
            power = power * u
    finite_part = gc * gamma(m) * rgamma(a) * rgamma(b) * finite * u ** (-m)

    log_prefactor = (-1.0) ** m * gc * rgamma(a - m) * rgamma(b - m)
    if log_prefactor == 0.0:
        return finite_part
    coef = 1.0 / math.factorial(m)
    psi1 = -_EULER_GAMMA
    psim = digamma(m + 1.0)
    psia, psib = digamma(a), digamma(b)
    acc = _Accumulator(shape)
    power = np.ones(shape)
    quiet = np.zeros(shape, dtype=int)
    for n in range(MAX_TERMS):
        term = coef * (log_u - psi1 - psim + psia + psib) * power
        acc.add(term)
        small = np.abs(term) <= SERIES_RTOL * np.abs(acc.total)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= SERIES_QUIET_TERMS):
            return finite_part - log_prefactor * acc.value
        coef *= (a + n) * (b + n) / ((n + 1.0) * (n + m + 1.0))
        psi1 += 1.0 / (n + 1.0)
        psim += 1.0 / (n + m + 1.0)
        psia += 1.0 / (a + n)
        psib += 1.0 / (b + n)
        power = power * u
    raise ConvergenceError("logarithmic connection series did not converge")


def hyp2f1_connection(p, y):
    """F(a, b, c; y) through the connection formulas around y = 1.

    Accurate when 1 - y is small; agrees with the direct series in the
    overlap region around y = 0.5.  Requires 0 < y < 1.
    """
    p = _params(p)
    scalar = np.ndim(y) == 0
    y = _check_domain(y)
    if np.any(y <= 0.0):
        raise DomainError("connection formula needs y > 0")
    if p.terminating:
        return _out(hyp2f1_series(p, y), scalar)
    a, b, c = p.a, p.b, p.c
    u = 1.0 - y
    d = p.excess
    m = round(d)
    if abs(d - m) <= INTEGER_SNAP:
        if m <= 0:
            result = _log_connection(a, b, c, -m, u)
        else:
            # Euler transformation moves c - a - b from +m to -m
            inner = HypergeomParams(c - a, c - b, c)
            if inner.terminating:
                result = u**m * hyp2f1_series(inner, y)
            else:
                result = u**m * _log_connection(inner.a, inner.b, c, m, u)
        return _out(result, scalar)

    first = gamma(c) * gamma(d) * rgamma(c - a) * rgamma(c - b)
    second = gamma(c) * gamma(-d) * rgamma(a) * rgamma(b)
    result = np.zeros(u.shape)
    if first != 0.0:
        result = result + first * hyp2f1_series((a, b, 1.0 - d), u)
    if second != 0.0:
        result = result + second * u**d * hyp2f1_series((c - a, c - b, 1.0 + d), u)
    return _out(result, scalar)


def hypergeom(p, y):
    """Gauss hypergeometric function F(a, b, c; y) for 0 <= y < 1.

    ``p`` is a HypergeomParams or an (a, b, c) tuple; ``y`` may be a scalar
    or an array.  Relative accuracy is about 1e-13 for moderate parameters.
    """
    p = _params(p)
    scalar = np.ndim(y) == 0
    y = _check_domain(y)
    if p.terminating:
        return _out(hyp2f1_series(p, y), scalar)
    out = np.empty(y.shape)
    low = y <= SERIES_SWITCH
    if np.any(low):
        out[low] = hyp2f1_series(p, y[low])
    if np.any(~low):
        out[~low] = hyp2f1_connection(p, y[~low])
    return _out(out, scalar)


def hypergeom_derivative(p, y):
    """d/dy F(a, b, c; y) = (ab/c) F(a+1, b+1, c+1; y)."""
    p = _params(p)
    return p.a * p.b / p.c * hypergeom(p.shifted(), y)


class BoundaryKind(Enum):
    LOG_DIVERGENT = "log_divergent"
    POWER_DIVERGENT = "power_divergent"
    CONVERGENT = "convergent"


@dataclass(frozen=True)
class BoundaryClass:
    """Behaviour of F(a, b, c; y) as y -> 1-.

    ``coefficient`` is lim F / ln(1-y) for LOG_DIVERGENT,
    lim F / (1-y)^(c-a-b) for POWER_DIVERGENT and F(a, b, c; 1) for
    CONVERGENT.
    """

    kind: BoundaryKind
    exponent: float
    coefficient: float


def boundary_class(p):
    p = _params(p)
    a, b, c = p.a, p.b, p.c
    d = p.excess
    if abs(d) <= INTEGER_SNAP:
        coef = -gamma(a + b) * rgamma(a) * rgamma(b)
        return BoundaryClass(BoundaryKind.LOG_DIVERGENT, 0.0, coef)
    if d < 0.0:
        coef = gamma(c) * gamma(a + b - c) * rgamma(a) * rgamma(b)
        return BoundaryClass(BoundaryKind.POWER_DIVERGENT, d, coef)
    coef = gamma(c) * gamma(d) * rgamma(c - a) * rgamma(c - b)
    return BoundaryClass(BoundaryKind.CONVERGENT, d, coef)
