"""Extremal solutions, their PDE residuals and the divergence-free flux field.

Points of the half-space are written z = (x, t) with x in R^(N-1).  With
rho = Phi0(x, t) and theta = arctan(t / H0(x)) the extremal is

    phi(x, t) = rho^(1 - N/2) f(theta),   f(theta) = w(sin^2 theta).
"""

from dataclasses import dataclass

import numpy as np

from .constants import ExtremalProfile, sharp_constant_halfspace
from .errors import OriginSingularity
from .finsler import ProductNorm, finsler_laplacian_fd
from .specfun import hypergeom

__all__ = [
    "DivergenceResult",
    "ExtremalSolution",
    "FluxField",
    "NormalDerivativeResult",
    "ResidualRow",
    "divergence_free_check",
    "eval_extremal",
    "normal_derivative_check",
    "pde_residual",
    "pde_tolerance",
    "point_from_polar",
    "polar_coordinates",
    "residual_sweep",
]


def polar_coordinates(product, x, t):
    """(rho, theta) with H0(x) = rho cos(theta) and t = rho sin(theta).

    theta = pi/2 on the ray x = 0.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    h0 = product.base.dual(x)
    rho = np.hypot(h0, t)
    if np.any(rho == 0.0):
        raise OriginSingularity("polar coordinates are undefined at the origin")
    theta = np.arctan2(t, h0)
    if theta.ndim == 0:
        return float(rho), float(theta)
    return rho, theta


def point_from_polar(product, rho, theta, direction):
    """Inverse map: x = rho cos(theta) e / H0(e), t = rho sin(theta)."""
    e = np.asarray(direction, dtype=float)
    unit = e / product.base.dual(e)[..., None]
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return (rho * np.cos(theta))[..., None] * unit, rho * np.sin(theta)


@dataclass(frozen=True)
class ExtremalSolution:
    """phi = rho^(1-N/2) f(theta) for a product norm and an angular profile."""

    product_norm: ProductNorm
    profile: ExtremalProfile

    @classmethod
    def halfspace(cls, base, N, beta):
        return cls(ProductNorm(base), ExtremalProfile.halfspace(N, beta))

    @classmethod
    def cone(cls, base, N, beta, alpha):
        return cls(ProductNorm(base), ExtremalProfile.cone(N, beta, alpha))

    @property
    def N(self):
        return self.profile.params.N

    @property
    def exponent(self):
        return 1.0 - self.N / 2.0

    def value(self, x, t):
        """phi through the polar form rho^(1-N/2) f(theta)."""
        rho, theta = polar_coordinates(self.product_norm, x, t)
        return rho**self.exponent * self.profile.f(theta)

    def value_direct(self, x, t):
        """phi through the closed form in (rho, t); agrees with :meth:`value` for t >= 0."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        rho = self.product_norm.polar(x, t)
        if np.any(rho == 0.0):
            raise OriginSingularity("the extremal is singular at the origin")
        y = (t / rho) ** 2
        p = self.profile.params
        even = hypergeom(p.even_params, y) / rho ** (self.N / 2.0 - 1.0)
        odd = t * hypergeom(p.odd_params, y) / rho ** (self.N / 2.0)
        return self.profile.scale * (even + self.profile.k * odd)

    def polar_derivatives(self, rho, theta):
        """(phi_rho, phi_theta)."""
        f = self.profile.f(theta)
        fp = self.profile.f_prime(theta)
        return self.exponent * rho ** (-self.N / 2.0) * f, rho**self.exponent * fp

    def gradient(self, x, t):
        """(grad_x phi, phi_t) by the chain rule through (rho, theta)."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        rho, theta = polar_coordinates(self.product_norm, x, t)
        d_rho, d_theta = self.polar_derivatives(rho, theta)
        c, s = np.cos(theta), np.sin(theta)
        radial = d_rho * c - d_theta * s / rho
        grad_x = np.asarray(radial)[..., None] * self.product_norm.base.dual_gradient(x)
        phi_t = d_rho * s + d_theta * c / rho
        return grad_x, phi_t

    def anisotropic_flux(self, x, t):
        """H(grad_x phi) grad H(grad_x phi) by the base norm applied to the gradient."""
        grad_x, _ = self.gradient(x, t)
        base = self.product_norm.base
        return base(grad_x)[..., None] * base.gradient(grad_x)

    def anisotropic_flux_polar(self, x, t):
        """Closed polar form (phi_rho / rho - tan(theta) phi_theta / rho^2) x of the same field."""
        x = np.asarray(x, dtype=float)
        rho, theta = polar_coordinates(self.product_norm, x, t)
        d_rho, d_theta = self.polar_derivatives(rho, theta)
        coef = d_rho / rho - np.tan(theta) * d_theta / rho**2
        return np.asarray(coef)[..., None] * x


def eval_extremal(sol, x, t):
    """phi(x, t)."""
    return sol.value(x, t)


@dataclass(frozen=True)
class NormalDerivativeResult:
    numeric: float
    expected: float

    @property
    def residual(self):
        return abs(self.numeric - self.expected) / abs(self.expected)


def normal_derivative_check(sol, x, eps=None):
    """One-sided d(phi)/dt at t = 0+ against -K(N, beta) H0(x)^(-N/2).

    Richardson on steps eps and 2 eps; phi is A(t^2) + t B(t^2) near the
    boundary, so the combination is second-order accurate.
    """
    x = np.asarray(x, dtype=float)
    h0 = float(sol.product_norm.base.dual(x))
    if eps is None:
        eps = 1e-4 * h0
    p = sol.profile.params
    phi0 = float(sol.value(x, 0.0))
    d1 = (float(sol.value(x, eps)) - phi0) / eps
    d2 = (float(sol.value(x, 2.0 * eps)) - phi0) / (2.0 * eps)
    numeric = 2.0 * d1 - d2
    expected = -sharp_constant_halfspace(p.N, p.beta) * h0 ** (-p.N / 2.0)
    return NormalDerivativeResult(numeric, expected)


def _second_difference(func, t, h):
    def central(step):
        return (func(t + step) - 2.0 * func(t) + func(t - step)) / step**2

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def pde_residual(sol, x, t, h=None):
    """Delta_Phi phi + (beta-2)^2/4 phi / rho^2 at an interior point.

    The x-part differences the Finsler field H(grad_x phi) grad H(grad_x phi)
    built from the analytic gradient; the t-part is a second difference of
    phi.  Both use Richardson extrapolation.
    """
    x = np.asarray(x, dtype=float)
    t = float(t)
    rho, _ = polar_coordinates(sol.product_norm, x, t)
    if h is None:
        h = 1e-3 * rho
    base = sol.product_norm.base
    lap_x = finsler_laplacian_fd(base, None, x, h=h, grad=lambda p: sol.gradient(p, t)[0])
    phi_tt = _second_difference(lambda s: float(sol.value(x, s)), t, h)
    phi = float(sol.value(x, t))
    return lap_x + phi_tt + sol.profile.params.hardy_coefficient * phi / rho**2


def pde_tolerance(sol, x, t, rel=1e-4):
    rho, _ = polar_coordinates(sol.product_norm, x, t)
    return rel * abs(float(sol.value(x, t))) / rho**2


@dataclass(frozen=True)
class ResidualRow:
    rho: float
    theta: float
    residual: float
    tolerance: float

    FIELDS = ("rho", "theta", "residual", "tolerance", "pass")

    @property
    def passed(self):
        return abs(self.residual) <= self.tolerance


def residual_sweep(sol, rhos, thetas, direction=None, rel=1e-4):
    """PDE residual on the (rho, theta) grid along one boundary direction."""
    n = sol.product_norm.base.dim
    if direction is None:
        direction = np.ones(n) / np.sqrt(n)
    rows = []
    for rho in rhos:
        for theta in thetas:
            x, t = point_from_polar(sol.product_norm, rho, theta, direction)
            res = pde_residual(sol, x, float(t))
            rows.append(ResidualRow(float(rho), float(theta), res, pde_tolerance(sol, x, float(t), rel)))
    return rows


class FluxField:
    """F(z, h) on (half-space) x (0, inf), divergence-free exactly when phi solves the PDE.

    Components: (2h/phi) H(grad_x phi) grad H(grad_x phi), (2h/phi) phi_t and
    (h/phi)^2 Phi(grad phi)^2 + (beta-2)^2/4 h^2 / rho^2.
    """

    def __init__(self, solution):
        self.solution = solution

    def __call__(self, x, t, h):
        sol = self.solution
        x = np.asarray(x, dtype=float)
        grad_x, phi_t = sol.gradient(x, t)
        phi = float(sol.value(x, t))
        rho, _ = polar_coordinates(sol.product_norm, x, t)
        base = sol.product_norm.base
        hx = base(grad_x)
        flux_x = hx * base.gradient(grad_x)
        primal_sq = hx**2 + phi_t**2
        last = (h / phi) ** 2 * primal_sq + sol.profile.params.hardy_coefficient * h**2 / rho**2
        return np.concatenate([2.0 * h / phi * flux_x, [2.0 * h / phi * phi_t, last]])

    def scale(self, x, t, h):
        """|F| max(1/rho, 1/h): the size a derivative of F would have without cancellation."""
        rho, _ = polar_coordinates(self.solution.product_norm, x, t)
        return float(np.linalg.norm(self(x, t, h))) * max(1.0 / rho, 1.0 / h)


@dataclass(frozen=True)
class DivergenceResult:
    divergence: float
    scale: float

    @property
    def ratio(self):
        return abs(self.divergence) / self.scale


def divergence_free_check(field, z, h, step=None):
    """Central-difference divergence of F in all N+1 variables, Richardson-extrapolated."""
    x, t = z
    x = np.asarray(x, dtype=float)
    t = float(t)
    n = x.size
    point = np.concatenate([x, [t, h]])
    if step is None:
        step = 1e-3 * min(float(np.linalg.norm(point[:-1])), h)

    def evaluate(p):
        return field(p[:n], p[n], p[n + 1])

    def divergence(d):
        total = 0.0
        for j in range(n + 2):
            e = np.zeros(n + 2)
            e[j] = d
            total += (evaluate(point + e)[j] - evaluate(point - e)[j]) / (2.0 * d)
        return total

    div = (4.0 * divergence(0.5 * step) - divergence(step)) / 3.0
    return DivergenceResult(float(div), field.scale(x, t, h))
