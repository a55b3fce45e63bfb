"""Test functions u(x, t) for the inequality checks.

Every function broadcasts over point arrays x of shape (..., N-1) and t of
shape (...), and returns its value and gradient (grad_x u, u_t).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError

__all__ = ["Family", "TestFunction", "bump", "cutoff_extremal", "gaussian_product", "custom", "random_bump", "zero"]


class Family(Enum):
    BUMP = "bump"
    CUTOFF_EXTREMAL = "cutoff_extremal"
    GAUSSIAN_PRODUCT = "gaussian_product"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TestFunction:
    """A square-integrable u with its gradient.

    ``support`` is the Phi0-annulus outside which u vanishes, or None for
    globally supported functions.  ``breakpoints`` are radii where u is only
    piecewise smooth; quadrature panels are split there.
    """

    __test__ = False

    family: Family
    evaluate: object
    gradient: object
    support: tuple = None
    breakpoints: tuple = ()
    exact_gradient: bool = True
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __call__(self, x, t):
        return self.evaluate(x, t)

    def scaled(self, c):
        c = float(c)
        return TestFunction(
            self.family,
            lambda x, t: c * self.evaluate(x, t),
            lambda x, t: tuple(c * g for g in self.gradient(x, t)),
            self.support,
            self.breakpoints,
            self.exact_gradient,
            self.label,
            dict(self.meta, scale=c * self.meta.get("scale", 1.0)),
        )


def _polynomial_bump(rho, r1, r2):
    """((rho-r1)(r2-rho))^3 normalised to peak 1 inside (r1, r2), else 0; C^2."""
    mid = 0.5 * (r2 - r1)
    inside = (rho > r1) & (rho < r2)
    g = np.where(inside, (rho - r1) * (r2 - rho), 0.0) / mid**2
    dg = np.where(inside, (r1 + r2 - 2.0 * rho), 0.0) / mid**2
    return g**3, 3.0 * g**2 * dg


def bump(product, r1, r2, direction=None, amplitude=1.0):
    """psi(Phi0(z)) exp(<v, z>/|z|) with psi a polynomial bump on (r1, r2).

    The exponential factor breaks the radial symmetry so that the angular
    part of the energy is exercised.
    """
    if not (0.0 < r1 < r2):
        raise ParameterError(f"bump needs 0 < r1 < r2, got ({r1}, {r2})")
    n = product.base.dim
    v = np.zeros(n + 1) if direction is None else np.asarray(direction, dtype=float)
    if v.shape != (n + 1,):
        raise ParameterError(f"bump direction must have length {n + 1}")
    amp = float(amplitude)

    def parts(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        rho = product.polar(x, t)
        psi, dpsi = _polynomial_bump(rho, r1, r2)
        r = np.sqrt(np.sum(x * x, axis=-1) + t * t)
        proj = (x @ v[:-1] + t * v[-1]) / r
        mod = amp * np.exp(proj)
        return x, t, rho, psi, dpsi, r, proj, mod

    def evaluate(x, t):
        *_, psi, _, _, _, mod = parts(x, t)
        return psi * mod

    def gradient(x, t):
        x, t, _, psi, dpsi, r, proj, mod = parts(x, t)
        gx_rho, gt_rho = product.polar_gradient(x, t)
        gx_proj = (v[:-1] - proj[..., None] * x / r[..., None]) / r[..., None]
        gt_proj = (v[-1] - proj * t / r) / r
        gx = mod[..., None] * (dpsi[..., None] * gx_rho + psi[..., None] * gx_proj)
        gt = mod * (dpsi * gt_rho + psi * gt_proj)
        return gx, gt

    return TestFunction(
        Family.BUMP, evaluate, gradient, (r1, r2), (), True, f"bump({r1:g},{r2:g})",
        {"r1": r1, "r2": r2, "direction": v.tolist(), "amplitude": amp},
    )


def random_bump(product, rng):
    """A bump with random radii, modulation direction and amplitude."""
    n = product.base.dim
    r1 = float(rng.uniform(0.3, 1.0))
    r2 = r1 * float(rng.uniform(1.5, 4.0))
    v = 0.5 * rng.standard_normal(n + 1)
    return bump(product, r1, r2, v, float(rng.uniform(0.5, 2.0)))


def _sine_cutoff(rho, r, R):
    L = math.log(R / r)
    s = np.log(rho / r)
    inside = (rho > r) & (rho < R)
    eta = np.where(inside, np.sin(np.pi * s / L), 0.0)
    deta = np.where(inside, np.pi / (L * rho) * np.cos(np.pi * s / L), 0.0)
    return eta, deta


def _dyadic_cutoff(rho, r, R):
    ln2 = math.log(2.0)
    up = np.log(rho / r) / ln2
    down = np.log(R / rho) / ln2
    a = np.clip(up, 0.0, 1.0)
    b = np.clip(down, 0.0, 1.0)
    da = np.where((up > 0.0) & (up < 1.0), 1.0 / (ln2 * rho), 0.0)
    db = np.where((down > 0.0) & (down < 1.0), -1.0 / (ln2 * rho), 0.0)
    return a * b, da * b + a * db


CUTOFFS = {"sine": _sine_cutoff, "dyadic": _dyadic_cutoff}


def cutoff_extremal(solution, r, R, cutoff="sine"):
    """phi eta(rho) with eta vanishing outside (r, R).

    ``sine`` uses eta = sin(pi ln(rho/r) / ln(R/r)); ``dyadic`` uses linear
    ramps in ln(rho) over the bands (r, 2r) and (R/2, R).
    """
    if cutoff not in CUTOFFS:
        raise ParameterError(f"unknown cutoff {cutoff!r}; choose from {sorted(CUTOFFS)}")
    if not (0.0 < r < R):
        raise ParameterError(f"cutoff needs 0 < r < R, got ({r}, {R})")
    if cutoff == "dyadic" and R < 4.0 * r:
        raise ParameterError("dyadic cutoff needs R >= 4 r")
    eta_fn = CUTOFFS[cutoff]
    product = solution.product_norm

    def evaluate(x, t):
        rho = product.polar(x, t)
        eta, _ = eta_fn(rho, r, R)
        inside = eta != 0.0
        out = np.zeros(np.shape(rho))
        if np.any(inside):
            xs = np.asarray(x, dtype=float)[inside]
            ts = np.broadcast_to(t, np.shape(rho))[inside]
            out[inside] = eta[inside] * solution.value(xs, ts)
        return out

    def gradient(x, t):
        x = np.asarray(x, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
        rho = product.polar(x, t)
        eta, deta = eta_fn(rho, r, R)
        gx = np.zeros(x.shape)
        gt = np.zeros(t.shape)
        inside = (rho > r) & (rho < R)
        if np.any(inside):
            xs, ts = x[inside], t[inside]
            phi = solution.value(xs, ts)
            gphi_x, gphi_t = solution.gradient(xs, ts)
            grho_x, grho_t = product.polar_gradient(xs, ts)
            e, de = eta[inside], deta[inside]
            gx[inside] = e[:, None] * gphi_x + (phi * de)[:, None] * grho_x
            gt[inside] = e * gphi_t + phi * de * grho_t
        return gx, gt

    breaks = (2.0 * r, 0.5 * R) if cutoff == "dyadic" else ()
    return TestFunction(
        Family.CUTOFF_EXTREMAL, evaluate, gradient, (r, R), breaks, True,
        f"cutoff_extremal({r:g},{R:g},{cutoff})", {"r": r, "R": R, "cutoff": cutoff},
    )


def gaussian_product(a=1.0, b=1.0):
    """exp(-a |x|^2) exp(-b t^2), globally supported."""

    def evaluate(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.exp(-a * np.sum(x * x, axis=-1) - b * t * t)

    def gradient(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        u = evaluate(x, t)
        return -2.0 * a * u[..., None] * x, -2.0 * b * t * u

    return TestFunction(Family.GAUSSIAN_PRODUCT, evaluate, gradient, None, (), True, f"gaussian({a:g},{b:g})", {"a": a, "b": b})


def custom(func, grad=None, support=None, step=1e-6):
    """User-supplied u; without ``grad`` the gradient is a central difference."""
    if grad is None:

        def grad(x, t):
            x = np.asarray(x, dtype=float)
            t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
            h = step * np.maximum(1.0, np.sqrt(np.sum(x * x, axis=-1) + t * t))
            gx = np.empty(x.shape)
            for j in range(x.shape[-1]):
                e = np.zeros(x.shape[-1])
                e[j] = 1.0
                gx[..., j] = (func(x + h[..., None] * e, t) - func(x - h[..., None] * e, t)) / (2.0 * h)
            gt = (func(x, t + h) - func(x, t - h)) / (2.0 * h)
            return gx, gt

        exact = False
    else:
        exact = True
    return TestFunction(Family.CUSTOM, func, grad, support, (), exact, "custom")


def zero():
    def evaluate(x, t):
        return np.zeros(np.shape(np.asarray(x))[:-1])

    def gradient(x, t):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape), np.zeros(x.shape[:-1])

    return TestFunction(Family.CUSTOM, evaluate, gradient, None, (), True, "zero")
