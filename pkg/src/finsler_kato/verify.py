"""Quadrature checks of the trace-Hardy inequality and Rayleigh-quotient sweeps."""

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import ProblemParams, format_number, sharp_constant_cone, sharp_constant_halfspace
from .errors import ZeroBoundaryTrace
from .extremal import ExtremalSolution
from .quadrature import QuadratureSpec, boundary_quadrature, volume_quadrature, with_error
from .testfunctions import cutoff_extremal

__all__ = [
    "InequalityReport",
    "RayleighRow",
    "boundary_integral",
    "check_inequality_cone",
    "check_inequality_halfspace",
    "energy_integral",
    "hardy_integral",
    "rayleigh_quotient",
    "rayleigh_sweep",
    "reports_csv",
]

ZERO_TRACE = 1e-14
INEXACT_GRADIENT_FACTOR = 10.0


def _breaks(u):
    return tuple(u.breakpoints)


def _volume_parts(u, product, N, q, theta_min):
    """(energy, int u^2 / rho^2) with coarse-grid error estimates."""
    base = product.base

    def integrand(x, t, rho):
        gx, gt = u.gradient(x, t)
        val = u(x, t)
        return np.stack([base(gx) ** 2 + gt**2, val**2 / rho**2], axis=-1)

    value, err = with_error(lambda spec: volume_quadrature(integrand, base, N, spec, theta_min, _breaks(u)), q)
    if not u.exact_gradient:
        err = err * INEXACT_GRADIENT_FACTOR
    return value, err


def energy_integral(u, product, q, theta_min=0.0):
    """int Phi(grad u)^2 over r_in < Phi0 < r_out (and theta > theta_min)."""
    value, err = _volume_parts(u, product, product.dim, q, theta_min)
    return float(value[0]), float(err[0])


def hardy_integral(u, product, beta, q, theta_min=0.0):
    """(beta-2)^2/4 int u^2 / Phi0^2 over the same region."""
    coef = (beta - 2.0) ** 2 / 4.0
    if coef == 0.0:
        return 0.0, 0.0
    value, err = _volume_parts(u, product, product.dim, q, theta_min)
    return coef * float(value[1]), coef * float(err[1])


def boundary_integral(u, base, q, alpha=0.0):
    """int u^2 / H0(x) over the boundary annulus, in the projected measure dx.

    For alpha != 0 the surface is t = tan(alpha) H0(x).
    """
    N = base.dim + 1

    def integrand(x, t, sigma):
        return u(x, t) ** 2 / sigma

    value, err = with_error(lambda spec: boundary_quadrature(integrand, base, N, spec, alpha, _breaks(u)), q)
    return float(value), float(err)


@dataclass(frozen=True)
class InequalityReport:
    """Both sides of the inequality for one test function.

    slack = rhs_energy - hardy_term - lhs_boundary must be >= -error_estimate.
    """

    N: int
    beta: float
    alpha: float
    family: str
    r_in: float
    r_out: float
    K: float
    lhs_boundary: float
    rhs_energy: float
    hardy_term: float
    slack: float
    error_estimate: float
    diagnostics: dict = field(default_factory=dict)

    CSV_FIELDS = ("N", "beta", "alpha", "family", "r_in", "r_out", "lhs", "energy", "hardy", "slack", "err")

    @property
    def holds(self):
        return self.slack >= -self.error_estimate

    @property
    def boundary(self):
        return self.lhs_boundary / self.K if self.K else 0.0

    def row(self):
        return {
            "N": self.N,
            "beta": format_number(self.beta),
            "alpha": format_number(self.alpha),
            "family": self.family,
            "r_in": format_number(self.r_in),
            "r_out": format_number(self.r_out),
            "lhs": format_number(self.lhs_boundary),
            "energy": format_number(self.rhs_energy),
            "hardy": format_number(self.hardy_term),
            "slack": format_number(self.slack),
            "err": format_number(self.error_estimate),
        }

    def to_dict(self):
        out = asdict(self)
        for key, value in out.items():
            if isinstance(value, float):
                out[key] = float(format_number(value))
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def reports_csv(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=InequalityReport.CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerow(report.row())
    return buf.getvalue()


def _region(u, q):
    """Clip the quadrature annulus to the support of u when it has one."""
    if u.support is None:
        return q
    lo = max(q.r_in, u.support[0])
    hi = min(q.r_out, u.support[1])
    if not lo < hi:
        return q
    return QuadratureSpec(lo, hi, q.n_radial, q.n_angular, q.n_sphere, q.radial_panels, q.rtol)


def _report(u, product, params, q, K, theta_min, alpha):
    region = _region(u, q)
    volume, verr = _volume_parts(u, product, params.N, region, theta_min)
    boundary, berr = boundary_integral(u, product.base, region, alpha)
    hardy_coef = params.hardy_coefficient
    energy, hardy = float(volume[0]), hardy_coef * float(volume[1])
    lhs = K * boundary
    err = float(verr[0]) + hardy_coef * float(verr[1]) + abs(K) * berr
    diagnostics = {"boundary_integral": boundary}
    if not u.exact_gradient:
        diagnostics["gradient"] = "finite differences; error estimate scaled by 10"
    return InequalityReport(
        params.N, params.beta, params.alpha, u.family.value, region.r_in, region.r_out,
        K, lhs, energy, hardy, energy - hardy - lhs, err, diagnostics,
    )


def check_inequality_halfspace(u, product, N, beta, q, k_override=None):
    """Report for the half-space inequality with constant K(N, beta) (or ``k_override``)."""
    params = ProblemParams(N, beta, 0.0)
    K = sharp_constant_halfspace(N, beta) if k_override is None else float(k_override)
    return _report(u, product, params, q, K, 0.0, 0.0)


def check_inequality_cone(u, product, N, beta, alpha, q, k_override=None):
    """Report for the cone t > tan(alpha) H0(x) with constant K(N, alpha, beta).

    The boundary term is int u(x, tan(alpha) H0(x))^2 / H0(x) dx; the surface
    measure factors cancel against the weight of the cone inequality.
    """
    params = ProblemParams(N, beta, alpha)
    K = sharp_constant_cone(params) if k_override is None else float(k_override)
    return _report(u, product, params, q, K, params.alpha, params.alpha)


def rayleigh_quotient(u, product, N, beta, q, alpha=0.0):
    """(energy - hardy) / boundary, which never falls below the sharp constant."""
    params = ProblemParams(N, beta, alpha)
    region = _region(u, q)
    boundary, _ = boundary_integral(u, product.base, region, params.alpha)
    if abs(boundary) < ZERO_TRACE:
        raise ZeroBoundaryTrace(f"boundary integral {boundary:.3e} is below {ZERO_TRACE:g}")
    volume, _ = _volume_parts(u, product, params.N, region, params.alpha)
    return (float(volume[0]) - params.hardy_coefficient * float(volume[1])) / boundary


@dataclass(frozen=True)
class RayleighRow:
    j: int
    r: float
    R: float
    quotient: float
    ratio: float

    FIELDS = ("j", "r_j", "R_j", "quotient", "quotient_over_K")

    def row(self):
        return {
            "j": self.j,
            "r_j": format_number(self.r),
            "R_j": format_number(self.R),
            "quotient": format_number(self.quotient),
            "quotient_over_K": format_number(self.ratio),
        }


def rayleigh_sweep(base, N, beta, js, alpha=0.0, cutoff="sine", n_radial=64, n_angular=32, n_sphere=32):
    """Quotients of the cutoff extremal on (10^-j, 10^j) for each j in ``js``."""
    params = ProblemParams(N, beta, alpha)
    if params.alpha == 0.0:
        sol = ExtremalSolution.halfspace(base, N, beta)
    else:
        sol = ExtremalSolution.cone(base, N, beta, params.alpha)
    K = sharp_constant_cone(params)
    rows = []
    for j in js:
        r, R = 10.0 ** (-j), 10.0**j
        u = cutoff_extremal(sol, r, R, cutoff)
        q = QuadratureSpec(r, R, n_radial, n_angular, n_sphere)
        value = rayleigh_quotient(u, sol.product_norm, N, beta, q, params.alpha)
        rows.append(RayleighRow(int(j), r, R, value, value / K))
    return rows


def is_nonincreasing(values, budget=0.0):
    return all(b <= a + budget * abs(a) for a, b in zip(values[:-1], values[1:]))

