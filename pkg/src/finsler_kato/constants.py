"""Sharp constants of the trace-Hardy inequality and the angular profile.

The angular profile is

    w(y) = scale * [F(a1, b1, 1/2; y) + k sqrt(y) F(a1 + 1/2, b1 + 1/2, 3/2; y)]

with a1 = (N+beta)/4 - 1 and b1 = (N-beta)/4.  Both branches solve the
angular ODE; only k = -K(N, beta) keeps w bounded as y -> 1.  For that
choice w is also w(1) F(a1, b1, (N-1)/2; 1-y), which is used for y > 1/2
where the two divergent branches would otherwise cancel.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCone, ParameterError
from .specfun import HypergeomParams, boundary_class, gamma, hypergeom, hypergeom_derivative

__all__ = [
    "ExtremalProfile",
    "ProblemParams",
    "SharpConstantReport",
    "angular_derivative_at_zero",
    "angular_solution",
    "boundedness_coefficients",
    "boundedness_residual",
    "cone_coefficient_A",
    "format_number",
    "k_from_boundedness",
    "sharp_constant_cone",
    "sharp_constant_halfspace",
    "sharp_constant_report",
]

DEGENERATE_A = 1e-12
BOUNDED_K_RTOL = 1e-14
# above this y the bounded profile is evaluated through its regular-at-one form
REGULAR_SWITCH = 0.5


def format_number(x):
    """Twelve significant digits; the text parses back to the printed value."""
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class ProblemParams:
    """Dimension N >= 3, weight 2 <= beta < N, cone angle |alpha| < pi/2."""

    N: int
    beta: float
    alpha: float = 0.0

    def __post_init__(self):
        try:
            n_float = float(self.N)
            beta = float(self.beta)
            alpha = float(self.alpha)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"non-numeric parameter: {exc}") from exc
        if not n_float.is_integer() or n_float < 3:
            raise ParameterError(f"N must be an integer >= 3, got {self.N!r}")
        if not (2.0 <= beta < n_float):
            raise ParameterError(f"beta must satisfy 2 <= beta < N={int(n_float)}, got {beta!r}")
        if not (abs(alpha) < math.pi / 2):
            raise ParameterError(f"alpha must satisfy |alpha| < pi/2, got {alpha!r}")
        object.__setattr__(self, "N", int(n_float))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)

    @property
    def even_params(self):
        """(a, b, c) of the even branch F(a1, b1, 1/2; y)."""
        a1 = (self.N + self.beta) / 4.0 - 1.0
        b1 = (self.N - self.beta) / 4.0
        return HypergeomParams(a1, b1, 0.5)

    @property
    def odd_params(self):
        """(a, b, c) of the branch multiplied by sqrt(y)."""
        a1 = (self.N + self.beta) / 4.0 - 1.0
        b1 = (self.N - self.beta) / 4.0
        return HypergeomParams(a1 + 0.5, b1 + 0.5, 1.5)

    @property
    def hardy_coefficient(self):
        return (self.beta - 2.0) ** 2 / 4.0

    @property
    def ode_coefficient(self):
        """Zeroth-order coefficient (N-2)^2/4 - (beta-2)^2/4 of the angular ODE."""
        return (self.N - 2.0) ** 2 / 4.0 - self.hardy_coefficient


def _params(N, beta, alpha=0.0):
    if isinstance(N, ProblemParams):
        return N
    return ProblemParams(N, beta, alpha)


def sharp_constant_halfspace(N, beta):
    """K(N, beta) from the four-Gamma formula."""
    p = _params(N, beta)
    s = (p.N + p.beta) / 4.0
    d = (p.N - p.beta) / 4.0
    return 2.0 * gamma(s - 0.5) * gamma(d + 0.5) / (gamma(s - 1.0) * gamma(d))


@dataclass(frozen=True)
class ExtremalProfile:
    """Angular profile w(y) and f(theta) = w(sin^2 theta).

    ``k`` multiplies the odd branch; ``scale`` multiplies the whole profile.
    """

    params: ProblemParams
    k: float
    scale: float = 1.0

    @classmethod
    def halfspace(cls, N, beta):
        p = _params(N, beta)
        return cls(p, -sharp_constant_halfspace(p.N, p.beta), 1.0)

    @classmethod
    def cone(cls, N, beta, alpha):
        p = _params(N, beta, alpha)
        return cls(p, -sharp_constant_halfspace(p.N, p.beta), 1.0 / cone_coefficient_A(p))

    def with_k(self, k):
        return ExtremalProfile(self.params, float(k), self.scale)

    @property
    def bounded(self):
        """True for the bounded branch k = -K(N, beta)."""
        K = sharp_constant_halfspace(self.params.N, self.params.beta)
        return abs(self.k + K) <= BOUNDED_K_RTOL * K

    @property
    def regular_params(self):
        """(a1, b1, (N-1)/2): the solution of the ODE regular at y = 1, in 1 - y."""
        even = self.params.even_params
        return HypergeomParams(even.a, even.b, (self.params.N - 1.0) / 2.0)

    @property
    def value_at_one(self):
        """w(1) of the bounded profile, Gamma(a1+1/2) Gamma(b1+1/2) / (Gamma((N-1)/2) Gamma(1/2))."""
        odd = self.params.odd_params
        return self.scale * gamma(odd.a) * gamma(odd.b) / (gamma((self.params.N - 1.0) / 2.0) * gamma(0.5))

    def _near_one(self, y):
        # the branch sum cancels like (1-y)^((3-N)/2) there; the regular form does not
        return (y > REGULAR_SWITCH) if self.bounded else np.zeros(np.shape(y), dtype=bool)

    def w(self, y):
        y = np.asarray(y, dtype=float)
        near = self._near_one(y)
        out = np.empty(y.shape)
        if np.any(~near):
            low = y[~near]
            even = hypergeom(self.params.even_params, low)
            odd = hypergeom(self.params.odd_params, low)
            out[~near] = self.scale * (even + self.k * np.sqrt(low) * odd)
        if np.any(near):
            out[near] = self.value_at_one * hypergeom(self.regular_params, 1.0 - y[near])
        return out if out.ndim else float(out)

    def w_prime(self, y):
        """dw/dy for 0 < y < 1 (the sqrt branch is singular at y = 0)."""
        y = np.asarray(y, dtype=float)
        near = self._near_one(y)
        out = np.empty(y.shape)
        if np.any(~near):
            low = y[~near]
            root = np.sqrt(low)
            podd = self.params.odd_params
            odd_part = hypergeom(podd, low) / (2.0 * root) + root * hypergeom_derivative(podd, low)
            out[~near] = self.scale * (hypergeom_derivative(self.params.even_params, low) + self.k * odd_part)
        if np.any(near):
            out[near] = -self.value_at_one * hypergeom_derivative(self.regular_params, 1.0 - y[near])
        return out if out.ndim else float(out)

    def f(self, theta):
        return self.w(np.sin(theta) ** 2)

    def f_prime(self, theta):
        """df/dtheta, finite at theta = 0 where it equals scale * k."""
        theta = np.asarray(theta, dtype=float)
        s = np.sin(theta)
        c = np.cos(theta)
        y = s * s
        near = self._near_one(y)
        out = np.empty(y.shape)
        if np.any(~near):
            sl, cl, yl = s[~near], c[~near], y[~near]
            podd = self.params.odd_params
            sign = np.where(sl < 0.0, -1.0, 1.0)
            even = 2.0 * sl * cl * hypergeom_derivative(self.params.even_params, yl)
            odd = sign * cl * hypergeom(podd, yl) + np.abs(sl) * 2.0 * sl * cl * hypergeom_derivative(podd, yl)
            out[~near] = self.scale * (even + self.k * odd)
        if np.any(near):
            out[near] = 2.0 * s[near] * c[near] * self.w_prime(y[near])
        return out if out.ndim else float(out)


def angular_solution(profile, y):
    """w(y) of ``profile``."""
    return profile.w(y)


def angular_derivative_at_zero(profile):
    """f'(0): the even branch drops out and the sqrt branch contributes k."""
    return float(profile.f_prime(0.0))


def boundedness_coefficients(N, beta):
    """Leading y -> 1 coefficients (c_even, c_odd) of the two branches.

    w(y) behaves like (c_even + k c_odd) times (1-y)^((3-N)/2), or times
    ln(1-y) when N = 3; boundedness requires c_even + k c_odd = 0.
    """
    p = _params(N, beta)
    even = boundary_class(p.even_params)
    odd = boundary_class(p.odd_params)
    return even.coefficient, odd.coefficient


def k_from_boundedness(N, beta):
    """The unique k cancelling the singular part of w at y = 1."""
    c_even, c_odd = boundedness_coefficients(N, beta)
    return -c_even / c_odd


def boundedness_residual(N, beta, k=None):
    """Relative size of c_even + k c_odd; zero for the bounded profile."""
    if k is None:
        k = -sharp_constant_halfspace(N, beta)
    c_even, c_odd = boundedness_coefficients(N, beta)
    return abs(c_even + k * c_odd) / (abs(c_even) + abs(k * c_odd))


def cone_coefficient_A(N, beta=None, alpha=0.0):
    """A = F(a1, b1, 1/2; sin^2 a) - K |sin a| F(a2, b2, 3/2; sin^2 a); exactly 1 at a = 0."""
    p = _params(N, beta, alpha)
    if p.alpha == 0.0:
        return 1.0
    y = math.sin(p.alpha) ** 2
    K = sharp_constant_halfspace(p.N, p.beta)
    A = hypergeom(p.even_params, y) - K * abs(math.sin(p.alpha)) * hypergeom(p.odd_params, y)
    if abs(A) < DEGENERATE_A:
        raise DegenerateCone(f"A = {A:.3e} for N={p.N}, beta={p.beta}, alpha={p.alpha}")
    return float(A)


def sharp_constant_cone(N, beta=None, alpha=0.0):
    """K(N, alpha, beta) = -sin(2 alpha) w'(sin^2 alpha) / A.

    Odd in alpha.  At alpha = 0 the expression is a 0/0-free limit equal to
    K(N, beta) and is returned directly.
    """
    p = _params(N, beta, alpha)
    K = sharp_constant_halfspace(p.N, p.beta)
    if p.alpha == 0.0:
        return K
    A = cone_coefficient_A(p)
    profile = ExtremalProfile(p, -K, 1.0)
    y = math.sin(p.alpha) ** 2
    return float(-math.sin(2.0 * p.alpha) * profile.w_prime(y) / A)


@dataclass(frozen=True)
class SharpConstantReport:
    params: ProblemParams
    K: float
    A: float
    boundedness_residual: float
    diagnostics: dict = field(default_factory=dict)

    FIELDS = ("N", "beta", "alpha", "K", "A", "boundedness_residual")

    def row(self):
        p = self.params
        return {
            "N": p.N,
            "beta": format_number(p.beta),
            "alpha": format_number(p.alpha),
            "K": format_number(self.K),
            "A": format_number(self.A),
            "boundedness_residual": format_number(self.boundedness_residual),
        }

    def to_dict(self):
        out = {key: (value if key == "N" else float(value)) for key, value in self.row().items()}
        if self.diagnostics:
            out["diagnostics"] = dict(self.diagnostics)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def csv_text(cls, reports):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cls.FIELDS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.row())
        return buf.getvalue()


def sharp_constant_report(N, beta=None, alpha=0.0):
    """Constant, cone coefficient and boundedness diagnostic for one parameter set."""
    p = _params(N, beta, alpha)
    K = sharp_constant_cone(p)
    A = cone_coefficient_A(p)
    diagnostics = {}
    if p.alpha < 0.0:
        diagnostics["sign"] = "K(N,alpha,beta) is odd in alpha; negative alpha flips its sign"
    return SharpConstantReport(p, K, A, boundedness_residual(p.N, p.beta), diagnostics)
