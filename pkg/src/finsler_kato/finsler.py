"""Finsler norms, their polar norms, and the product norms on the half-space.

A :class:`FinslerNorm` ``H`` lives on R^n.  ``H(xi)`` measures gradients and
``H.dual(x)`` (the polar norm H0) measures points.  Closed forms are used for
the Euclidean, weighted quadratic and p-norm families; a CUSTOM norm only
supplies H and gets its polar norm by numerical maximisation.

All evaluation methods broadcast over leading axes: a point array has shape
``(..., n)``.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import GradientTooSmall, OptimizerStall, ParameterError

__all__ = [
    "FinslerNorm",
    "IdentityResiduals",
    "NormFamily",
    "ProductNorm",
    "Side",
    "cauchy_schwarz_check",
    "dual_gradient_identities_check",
    "dual_norm",
    "dual_pair_check",
    "finsler_laplacian_fd",
    "parse_norm",
    "product_norm_eval",
]

DUAL_STARTS = 8
DUAL_ITERATIONS = 200
DUAL_SPREAD_TOL = 1e-6
GAMMA_SAMPLES = 10_000
GAMMA_MARGIN = 0.01


class NormFamily(Enum):
    EUCLIDEAN = "euclidean"
    WEIGHTED_QUADRATIC = "quad"
    P_NORM = "pnorm"
    CUSTOM = "custom"


def _safe_divide(num, den):
    den = np.asarray(den, dtype=float)
    safe = np.where(den == 0.0, 1.0, den)
    return np.where(den == 0.0, 0.0, num / safe)


def _pnorm(v, p):
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v), axis=-1)
    scaled = _safe_divide(np.abs(v), scale[..., None])
    return scale * np.sum(scaled**p, axis=-1) ** (1.0 / p)


def _pnorm_gradient(v, p):
    v = np.asarray(v, dtype=float)
    n = _pnorm(v, p)
    ratio = _safe_divide(np.abs(v), n[..., None])
    return np.sign(v) * ratio ** (p - 1.0)


def _quadratic_norm(v, matrix):
    """sqrt(v^T M v) computed on v / max|v| so tiny or huge v neither underflow nor overflow."""
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v), axis=-1)
    scaled = _safe_divide(v, scale[..., None])
    return scale * np.sqrt(np.einsum("...i,ij,...j->...", scaled, matrix, scaled))


def _fd_gradient(func, v, step=None):
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    if step is None:
        step = np.maximum(1e-6, 1e-6 * np.linalg.norm(v, axis=-1))[..., None]
    grad = np.empty(v.shape)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        grad[..., j] = (func(v + step * e) - func(v - step * e)) / (2.0 * step[..., 0])
    return grad


class FinslerNorm:
    """A symmetric Finsler norm H on R^n together with its polar norm H0.

    Build instances with the family constructors :meth:`euclidean`,
    :meth:`p_norm`, :meth:`weighted_quadratic` or :meth:`custom`.
    Instances are treated as immutable.
    """

    def __init__(self, dim, family, *, p=None, matrix=None, func=None, grad=None):
        if int(dim) < 1:
            raise ParameterError(f"dimension must be positive, got {dim!r}")
        self.dim = int(dim)
        self.family = family
        self.p = p
        self.matrix = matrix
        self._func = func
        self._grad = grad
        if family is NormFamily.P_NORM:
            if not (1.0 < p < np.inf):
                raise ParameterError(f"p-norm needs 1 < p < inf, got p={p!r}")
            self.q = p / (p - 1.0)
        if family is NormFamily.WEIGHTED_QUADRATIC:
            m = np.asarray(matrix, dtype=float)
            if m.shape != (self.dim, self.dim) or not np.allclose(m, m.T, atol=1e-12):
                raise ParameterError("weighted quadratic norm needs a symmetric matrix")
            eig = np.linalg.eigvalsh(m)
            if eig[0] <= 0.0:
                raise ParameterError("weighted quadratic norm needs a positive definite matrix")
            self.matrix = m
            self._inverse = np.linalg.inv(m)
            self._eig = eig

    @classmethod
    def euclidean(cls, dim):
        return cls(dim, NormFamily.EUCLIDEAN)

    @classmethod
    def p_norm(cls, dim, p):
        return cls(dim, NormFamily.P_NORM, p=float(p))

    @classmethod
    def weighted_quadratic(cls, matrix):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(m.shape[0], NormFamily.WEIGHTED_QUADRATIC, matrix=m)

    @classmethod
    def custom(cls, func, dim, grad=None):
        """Norm given only by ``func``, which must broadcast over ``(..., dim)``.

        The caller is responsible for ``func`` being an even, strictly convex
        norm; that contract is not checked.
        """
        return cls(dim, NormFamily.CUSTOM, func=func, grad=grad)

    def __repr__(self):
        return f"FinslerNorm({self.spec!r}, dim={self.dim})"

    @property
    def spec(self):
        """Short textual form, as accepted by :func:`parse_norm`."""
        if self.family is NormFamily.EUCLIDEAN:
            return "euclidean"
        if self.family is NormFamily.P_NORM:
            return f"pnorm:{self.p:g}"
        if self.family is NormFamily.WEIGHTED_QUADRATIC:
            return "quad:" + ",".join(f"{v:g}" for v in self.matrix.ravel())
        return "custom"

    # primal norm H

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        fam = self.family
        if fam is NormFamily.EUCLIDEAN:
            return _pnorm(xi, 2.0)
        if fam is NormFamily.P_NORM:
            return _pnorm(xi, self.p)
        if fam is NormFamily.WEIGHTED_QUADRATIC:
            return _quadratic_norm(xi, self.matrix)
        return np.asarray(self._func(xi), dtype=float)

    def gradient(self, xi):
        """Gradient of H; zero at the origin where H is not differentiable."""
        xi = np.asarray(xi, dtype=float)
        fam = self.family
        if fam is NormFamily.EUCLIDEAN:
            return _safe_divide(xi, _pnorm(xi, 2.0)[..., None])
        if fam is NormFamily.P_NORM:
            return _pnorm_gradient(xi, self.p)
        if fam is NormFamily.WEIGHTED_QUADRATIC:
            return _safe_divide(xi @ self.matrix, self(xi)[..., None])
        if self._grad is not None:
            return np.asarray(self._grad(xi), dtype=float)
        return _fd_gradient(self, xi)

    # polar norm H0

    def dual(self, x):
        x = np.asarray(x, dtype=float)
        fam = self.family
        if fam is NormFamily.EUCLIDEAN:
            return _pnorm(x, 2.0)
        if fam is NormFamily.P_NORM:
            return _pnorm(x, self.q)
        if fam is NormFamily.WEIGHTED_QUADRATIC:
            return _quadratic_norm(x, self._inverse)
        return self._custom_dual(x)[0]

    def dual_gradient(self, x):
        """Gradient of H0; zero at the origin."""
        x = np.asarray(x, dtype=float)
        fam = self.family
        if fam is NormFamily.EUCLIDEAN:
            return _safe_divide(x, _pnorm(x, 2.0)[..., None])
        if fam is NormFamily.P_NORM:
            return _pnorm_gradient(x, self.q)
        if fam is NormFamily.WEIGHTED_QUADRATIC:
            return _safe_divide(x @ self._inverse, self.dual(x)[..., None])
        # envelope theorem: the maximiser of <xi, x> on {H = 1} is grad H0(x)
        return self._custom_dual(x)[1]

    def _custom_dual(self, x):
        flat = x.reshape(-1, self.dim)
        values = np.empty(len(flat))
        argmax = np.empty(flat.shape)
        for i, point in enumerate(flat):
            values[i], argmax[i] = _maximise_on_unit_sphere(self, point)
        return values.reshape(x.shape[:-1]), argmax.reshape(x.shape)

    # norm-equivalence constants

    @cached_property
    def gammas(self):
        """(gamma1, gamma2) with gamma1 |xi| <= H(xi) <= gamma2 |xi|."""
        fam = self.family
        if fam is NormFamily.EUCLIDEAN:
            return 1.0, 1.0
        if fam is NormFamily.P_NORM:
            ratio = self.dim ** (1.0 / self.p - 0.5)
            return min(1.0, ratio), max(1.0, ratio)
        if fam is NormFamily.WEIGHTED_QUADRATIC:
            return float(np.sqrt(self._eig[0])), float(np.sqrt(self._eig[-1]))
        rng = np.random.default_rng(0)
        dirs = rng.standard_normal((GAMMA_SAMPLES, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        vals = self(dirs)
        return float(vals.min() * (1.0 - GAMMA_MARGIN)), float(vals.max() * (1.0 + GAMMA_MARGIN))

    @property
    def gamma1(self):
        return self.gammas[0]

    @property
    def gamma2(self):
        return self.gammas[1]


def _start_directions(dim):
    rng = np.random.default_rng(12345)
    starts = []
    for j in range(dim):
        for sign in (1.0, -1.0):
            e = np.zeros(dim)
            e[j] = sign
            starts.append(e)
    while len(starts) < DUAL_STARTS:
        starts.append(rng.standard_normal(dim))
    starts = np.array(starts)
    # nudge away from exact critical points such as xi = -x
    starts += 1e-2 * rng.standard_normal(starts.shape)
    return starts


def _half_square_gradient(norm, xi):
    return norm(xi)[:, None] * norm.gradient(xi)


def _maximise_on_unit_sphere(norm, x):
    """sup <xi, x> / H(xi) through the convex dual problem.

    min_xi H(xi)^2 / 2 - <xi, x> is attained at xi* with H(xi*) grad H(xi*) = x,
    so H0(x) = H(xi*) and grad H0(x) = xi* / H(xi*).  Damped Newton with a
    finite-difference Hessian is run from every start; the starts must agree
    to DUAL_SPREAD_TOL.  Returns (H0(x), grad H0(x)).
    """
    if not np.any(x):
        return 0.0, np.zeros_like(x)
    scale = np.linalg.norm(x)
    xs = x / scale
    n = norm.dim
    xi = _start_directions(n)
    xi /= norm(xi)[:, None]

    def objective(v):
        return 0.5 * norm(v) ** 2 - v @ xs

    for _ in range(DUAL_ITERATIONS):
        g = _half_square_gradient(norm, xi) - xs
        gnorm = np.linalg.norm(g, axis=1)
        if np.all(gnorm < 1e-13):
            break
        hstep = 1e-5 * np.maximum(np.linalg.norm(xi, axis=1), 1e-3)
        hess = np.empty((len(xi), n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            plus = _half_square_gradient(norm, xi + hstep[:, None] * e)
            minus = _half_square_gradient(norm, xi - hstep[:, None] * e)
            hess[:, :, j] = (plus - minus) / (2.0 * hstep[:, None])
        hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))
        try:
            d = -np.linalg.solve(hess, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            d = -g
        descent = np.sum(d * g, axis=1)
        bad = ~(descent < 0.0) | ~np.all(np.isfinite(d), axis=1)
        d[bad] = -g[bad]
        descent = np.sum(d * g, axis=1)
        f0 = objective(xi)
        t = np.ones(len(xi))
        for _ in range(50):
            cand = xi + t[:, None] * d
            fail = objective(cand) > f0 + 1e-4 * t * descent
            fail &= gnorm >= 1e-13
            if not np.any(fail):
                break
            t[fail] *= 0.5
        move = t[:, None] * d
        xi = xi + move
        if np.max(np.linalg.norm(move, axis=1)) < 1e-14:
            break
    h = norm(xi)
    val = xi @ xs / h
    best = int(np.argmax(val))
    top = val[best]
    if (top - val.min()) > DUAL_SPREAD_TOL * abs(top):
        raise OptimizerStall(
            f"multi-start spread {top - val.min():.3e} exceeds tolerance at x={x!r}"
        )
    return float(top * scale), xi[best] / h[best]


def dual_norm(norm, x):
    """Polar norm H0(x) = sup <xi, x> / H(xi)."""
    return norm.dual(x)


@dataclass(frozen=True)
class IdentityResiduals:
    """Residuals of the four basic polar-norm identities at one point."""

    gradient_parity: float
    euler: float
    unit_dual_gradient: float
    inverse_gradient: float

    @property
    def worst(self):
        return max(self.gradient_parity, self.euler, self.unit_dual_gradient, self.inverse_gradient)


def dual_gradient_identities_check(norm, x, lambdas=(-3.0, -0.5, 0.25, 2.0)):
    """Residuals of the identities linking H, H0 and their gradients at x.

    (i)   grad H(l xi) = sign(l) grad H(xi)
    (ii)  <grad H(xi), xi> = H(xi)
    (iii) H(grad H0(x)) = 1
    (iv)  grad H(grad H0(x)) = x / H0(x)
    (i) and (ii) are evaluated at xi = x.
    """
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise GradientTooSmall("identities are only defined away from the origin")
    g = norm.gradient(x)
    parity = max(
        float(np.max(np.abs(norm.gradient(lam * x) - np.sign(lam) * g))) for lam in lambdas
    )
    euler = abs(float(g @ x) - float(norm(x))) / float(norm(x))
    dg = norm.dual_gradient(x)
    unit = abs(float(norm(dg)) - 1.0)
    inverse = float(np.max(np.abs(norm.gradient(dg) - x / norm.dual(x))))
    return IdentityResiduals(parity, euler, unit, inverse)


def cauchy_schwarz_check(norm, xi, x):
    """True iff |<xi, x>| <= H(xi) H0(x) up to a 1e-9 relative slack."""
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    lhs = np.abs(np.sum(xi * x, axis=-1))
    rhs = norm(xi) * norm.dual(x) * (1.0 + 1e-9)
    return bool(np.all(lhs <= rhs))


class Side(Enum):
    PRIMAL = "primal"
    POLAR = "polar"


class ProductNorm:
    """Norms on R^(N-1) x R built from a base norm H on R^(N-1).

    ``polar(x, t) = sqrt(H0(x)^2 + t^2)`` measures points and
    ``primal(xi, t) = sqrt(H(xi)^2 + t^2)`` measures gradients.
    """

    def __init__(self, base):
        self.base = base

    @property
    def dim(self):
        return self.base.dim + 1

    def __repr__(self):
        return f"ProductNorm({self.base!r})"

    def primal(self, xi, t):
        return np.hypot(self.base(xi), t)

    def polar(self, x, t):
        return np.hypot(self.base.dual(x), t)

    def primal_gradient(self, xi, t):
        """(d/dxi, d/dt) of the primal product norm."""
        h = self.base(xi)
        phi = np.hypot(h, t)
        return (
            _safe_divide(h[..., None] * self.base.gradient(xi), phi[..., None]),
            _safe_divide(np.asarray(t, dtype=float), phi),
        )

    def polar_gradient(self, x, t):
        """(d/dx, d/dt) of the polar product norm."""
        h0 = self.base.dual(x)
        rho = np.hypot(h0, t)
        return (
            _safe_divide(h0[..., None] * self.base.dual_gradient(x), rho[..., None]),
            _safe_divide(np.asarray(t, dtype=float), rho),
        )

    def as_norm(self):
        """The primal product norm as a CUSTOM FinslerNorm on R^N."""
        base = self.base

        def func(v):
            v = np.asarray(v, dtype=float)
            return np.hypot(base(v[..., :-1]), v[..., -1])

        def grad(v):
            v = np.asarray(v, dtype=float)
            gx, gt = self.primal_gradient(v[..., :-1], v[..., -1])
            return np.concatenate([gx, np.asarray(gt)[..., None]], axis=-1)

        return FinslerNorm.custom(func, self.dim, grad=grad)


def product_norm_eval(product, point, side=Side.POLAR):
    """Evaluate the product norm at ``point = (vector, t)``."""
    v, t = point
    if Side(side) is Side.PRIMAL:
        return product.primal(v, t)
    return product.polar(v, t)


def dual_pair_check(product, x, t):
    """|polar(x, t) - numerical polar of the primal product norm at (x, t)|.

    Confirms that the closed-form polar product norm is the polar of the
    primal one; the right-hand side is an independent numerical sup.
    """
    z = np.append(np.asarray(x, dtype=float), float(t))
    numeric = product.as_norm().dual(z)
    return abs(float(product.polar(x, t)) - float(numeric))


def finsler_laplacian_fd(norm, u, x, h=None, grad=None, richardson=True):
    """Finsler Laplacian div(H(grad u) grad H(grad u)) at x by central differences.

    ``grad`` is an optional closed-form gradient of ``u``; without it the
    gradient itself is differenced.  With ``richardson`` the divergence is
    extrapolated from steps h and h/2.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if grad is None:
        def grad(p):
            gstep = max(1e-5, 1e-5 * np.linalg.norm(p))
            out = np.empty(n)
            for j in range(n):
                e = np.zeros(n)
                e[j] = gstep
                out[j] = (u(p + e) - u(p - e)) / (2.0 * gstep)
            return out

    g0 = np.asarray(grad(x), dtype=float)
    if np.linalg.norm(g0) < 1e-8:
        raise GradientTooSmall(f"|grad u| = {np.linalg.norm(g0):.3e} at x={x!r}")
    if h is None:
        h = max(1e-3, 1e-3 * np.linalg.norm(x))

    def field(p):
        g = np.asarray(grad(p), dtype=float)
        return norm(g) * norm.gradient(g)

    def divergence(step):
        total = 0.0
        for j in range(n):
            e = np.zeros(n)
            e[j] = step
            total += (field(x + e)[j] - field(x - e)[j]) / (2.0 * step)
        return total

    coarse = divergence(h)
    if not richardson:
        return float(coarse)
    fine = divergence(0.5 * h)
    return float((4.0 * fine - coarse) / 3.0)


def parse_norm(text, dim):
    """Build a base norm from ``euclidean``, ``pnorm:<p>``, ``quad:<row-major>``
    or ``diag:<d1,...>``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    try:
        if name == "euclidean":
            return FinslerNorm.euclidean(dim)
        if name == "pnorm":
            return FinslerNorm.p_norm(dim, float(arg))
        if name == "diag":
            vals = [float(v) for v in arg.split(",")]
            if len(vals) != dim:
                raise ParameterError(f"diag norm needs {dim} entries, got {len(vals)}")
            return FinslerNorm.weighted_quadratic(np.diag(vals))
        if name == "quad":
            vals = [float(v) for v in arg.split(",")]
            if len(vals) != dim * dim:
                raise ParameterError(f"quad norm needs {dim * dim} entries, got {len(vals)}")
            return FinslerNorm.weighted_quadratic(np.reshape(vals, (dim, dim)))
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"cannot parse norm {text!r}: {exc}") from exc
    raise ParameterError(f"unknown norm family {text!r}")
