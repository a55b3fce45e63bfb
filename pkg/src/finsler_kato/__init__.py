"""Sharp constants, extremal solutions and numerical checks of the Finsler
trace-Hardy (Kato) inequality on the half-space and on cones."""

from .constants import (
    ExtremalProfile,
    ProblemParams,
    SharpConstantReport,
    angular_derivative_at_zero,
    angular_solution,
    cone_coefficient_A,
    sharp_constant_cone,
    sharp_constant_halfspace,
    sharp_constant_report,
)
from .errors import FinslerKatoError
from .extremal import ExtremalSolution, FluxField, eval_extremal, polar_coordinates
from .finsler import FinslerNorm, ProductNorm, dual_norm
from .quadrature import QuadratureSpec
from .specfun import HypergeomParams, gamma, hypergeom, hypergeom_derivative
from .verify import (
    InequalityReport,
    check_inequality_cone,
    check_inequality_halfspace,
    rayleigh_quotient,
)

__version__ = "0.1.0"

__all__ = [
    "ExtremalProfile",
    "ExtremalSolution",
    "FinslerKatoError",
    "FinslerNorm",
    "FluxField",
    "HypergeomParams",
    "InequalityReport",
    "ProblemParams",
    "ProductNorm",
    "QuadratureSpec",
    "SharpConstantReport",
    "angular_derivative_at_zero",
    "angular_solution",
    "check_inequality_cone",
    "check_inequality_halfspace",
    "cone_coefficient_A",
    "dual_norm",
    "eval_extremal",
    "gamma",
    "hypergeom",
    "hypergeom_derivative",
    "polar_coordinates",
    "rayleigh_quotient",
    "sharp_constant_cone",
    "sharp_constant_halfspace",
    "sharp_constant_report",
]
