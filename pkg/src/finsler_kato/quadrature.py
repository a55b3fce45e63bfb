"""Tensor Gauss-Legendre quadrature on Phi0-annuli of the half-space and of cones.

Volume points are parametrised by (s, theta, e) with s = ln(rho), theta the
elevation above the boundary and e on the Euclidean unit sphere of R^(N-1):

    x = rho cos(theta) e / H0(e),   t = rho sin(theta),
    dz = rho^N cos(theta)^(N-2) H0(e)^(1-N) ds dtheta dS(e).

Boundary points use x = sigma e / H0(e) with dx = sigma^(N-1) H0(e)^(1-N) d(ln sigma) dS(e).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ParameterError, QuadratureNotConverged

__all__ = ["QuadratureSpec", "SphereRule", "boundary_quadrature", "sphere_rule", "volume_quadrature", "worker_count"]

MIN_RESOLUTION = 4


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _mapped_gauss(n, lo, hi):
    nodes, weights = _gauss_legendre(n)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


@dataclass(frozen=True)
class SphereRule:
    points: np.ndarray
    weights: np.ndarray


def _split_gauss(n, edges):
    """Gauss-Legendre on consecutive panels, about n nodes in total (>= 2 per panel)."""
    per = max(2, -(-n // (len(edges) - 1)))
    parts = [_mapped_gauss(per, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


@lru_cache(maxsize=None)
def sphere_rule(dim, n):
    """Product rule on the unit sphere S^dim in R^(dim+1).

    Every coordinate hyperplane lies on a panel edge: S^1 is split into
    quadrants and each polar coordinate at the equator.  Polar norms such as
    the dual of a p-norm are only finitely smooth across those hyperplanes,
    and Gauss-Legendre tolerates that at panel ends.  S^2 is integrated in
    the height c = cos(chi), where the area weight is exactly 1; higher
    spheres use the angle chi with weight sin(chi)^(dim-1).
    """
    if dim < 0:
        raise ParameterError(f"sphere dimension must be >= 0, got {dim}")
    if dim == 0:
        return SphereRule(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    if dim == 1:
        phi, w = _split_gauss(n, np.linspace(0.0, 2.0 * np.pi, 5))
        return SphereRule(np.column_stack([np.cos(phi), np.sin(phi)]), w)
    if dim == 2:
        height, wlevel = _split_gauss(n, [-1.0, 0.0, 1.0])
        ring = np.sqrt(1.0 - height * height)
    else:
        chi, wchi = _split_gauss(n, [0.0, 0.5 * np.pi, np.pi])
        height, ring = np.cos(chi), np.sin(chi)
        wlevel = wchi * ring ** (dim - 1)
    inner = sphere_rule(dim - 1, n)
    pts = np.concatenate(
        [
            np.repeat(height, len(inner.weights))[:, None],
            (ring[:, None, None] * inner.points[None, :, :]).reshape(-1, dim),
        ],
        axis=1,
    )
    wts = np.outer(wlevel, inner.weights).ravel()
    return SphereRule(pts, wts)


def worker_count():
    """Thread count: CPU count, capped by the FH_THREADS environment variable."""
    count = os.cpu_count() or 1
    cap = os.environ.get("FH_THREADS")
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError as exc:
            raise ParameterError(f"FH_THREADS must be an integer, got {cap!r}") from exc
    return count


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation radii in rho = Phi0 and per-axis Gauss-Legendre resolutions.

    ``n_radial`` nodes are used on every radial panel.  Panels split
    [ln r_in, ln r_out] into ``radial_panels`` equal pieces and at any
    breakpoint a test function declares.
    """

    r_in: float
    r_out: float
    n_radial: int = 64
    n_angular: int = 32
    n_sphere: int = 32
    radial_panels: int = 1
    rtol: float = 1e-2

    def __post_init__(self):
        if not (0.0 < self.r_in < self.r_out < math.inf):
            raise ParameterError(f"need 0 < r_in < r_out, got ({self.r_in}, {self.r_out})")
        for name in ("n_radial", "n_angular", "n_sphere"):
            if getattr(self, name) < MIN_RESOLUTION:
                raise ParameterError(f"{name} must be >= {MIN_RESOLUTION}")
        if self.radial_panels < 1:
            raise ParameterError("radial_panels must be >= 1")

    def coarsened(self):
        return replace(
            self,
            n_radial=max(MIN_RESOLUTION, self.n_radial // 2),
            n_angular=max(MIN_RESOLUTION, self.n_angular // 2),
            n_sphere=max(MIN_RESOLUTION, self.n_sphere // 2),
        )

    def refined(self):
        return replace(self, n_radial=2 * self.n_radial, n_angular=2 * self.n_angular, n_sphere=2 * self.n_sphere)

    def log_edges(self, breakpoints=(), factor=1.0):
        lo = math.log(self.r_in * factor)
        hi = math.log(self.r_out * factor)
        edges = set(np.linspace(lo, hi, self.radial_panels + 1).tolist())
        for b in breakpoints:
            sb = math.log(b * factor)
            if lo < sb < hi:
                edges.add(sb)
        return sorted(edges)

    def radial_rule(self, breakpoints=(), factor=1.0):
        """Nodes and weights in s = ln(factor * rho) over all panels."""
        edges = self.log_edges(breakpoints, factor)
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            s, w = _mapped_gauss(self.n_radial, lo, hi)
            nodes.append(s)
            weights.append(w)
        return np.concatenate(nodes), np.concatenate(weights)


def _directions(base, N, n_sphere):
    rule = sphere_rule(N - 2, n_sphere)
    h0 = base.dual(rule.points)
    unit = rule.points / h0[:, None]
    return unit, rule.weights * h0 ** (1.0 - N)


def _reduce(partials):
    return np.sum(np.asarray(partials), axis=0)


def _map_chunks(task, items):
    workers = worker_count()
    if workers == 1 or len(items) == 1:
        return [task(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, items))


def volume_quadrature(integrand, base, N, q, theta_min=0.0, breakpoints=()):
    """Integrate ``integrand(x, t, rho) -> (..., m)`` over r_in < rho < r_out, theta > theta_min.

    Returns the m integrals; chunks are radial nodes, reduced in fixed order.
    """
    s_nodes, s_weights = q.radial_rule(breakpoints)
    theta, wtheta = _mapped_gauss(q.n_angular, theta_min, 0.5 * np.pi)
    wtheta = wtheta * np.cos(theta) ** (N - 2)
    unit, wdir = _directions(base, N, q.n_sphere)
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    def task(i):
        rho = math.exp(s_nodes[i])
        x = (rho * cos_t)[:, None, None] * unit[None, :, :]
        t = np.broadcast_to((rho * sin_t)[:, None], x.shape[:-1])
        vals = integrand(x, t, rho)
        w = np.outer(wtheta, wdir)
        return s_weights[i] * rho**N * np.einsum("ij,ij...->...", w, vals)

    return _reduce(_map_chunks(task, range(len(s_nodes))))


def boundary_quadrature(integrand, base, N, q, alpha=0.0, breakpoints=()):
    """Integrate ``integrand(x, t, sigma)`` over the boundary surface t = tan(alpha) H0(x).

    sigma = H0(x) runs over (r_in cos(alpha), r_out cos(alpha)), the slice of the
    annulus; the measure is dx on the projection to R^(N-1).
    """
    factor = math.cos(alpha)
    s_nodes, s_weights = q.radial_rule(breakpoints, factor)
    unit, wdir = _directions(base, N, q.n_sphere)
    slope = math.tan(alpha)

    def task(i):
        sigma = math.exp(s_nodes[i])
        x = sigma * unit
        t = np.full(len(unit), slope * sigma)
        vals = integrand(x, t, sigma)
        return s_weights[i] * sigma ** (N - 1) * np.einsum("j,j...->...", wdir, vals)

    return _reduce(_map_chunks(task, range(len(s_nodes))))


def with_error(compute, q):
    """(value, |value - value on a comparison grid|), failing if the change is large.

    The comparison grid is the coarsened one, or the refined one when q is
    already at the minimum resolution and cannot be coarsened.
    """
    value = np.asarray(compute(q), dtype=float)
    other = q.coarsened()
    if other == q:
        other = q.refined()
    err = np.abs(value - np.asarray(compute(other), dtype=float))
    limit = 10.0 * q.rtol * np.abs(value) + 1e-14
    if np.any(err > limit):
        raise QuadratureNotConverged(
            f"changing the resolution moved the integral by {np.max(err):.3e} (limit {np.max(limit):.3e})"
        )
    return value, err
