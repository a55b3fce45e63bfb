"""Exception hierarchy.

Every error carries a ``code`` matching the names used in reports and in the
CLI diagnostics, so callers can switch on ``err.code`` instead of types.
"""


class FinslerKatoError(Exception):
    code = "ERROR"


class PoleError(FinslerKatoError, ValueError):
    code = "POLE_AT_NONPOSITIVE_INTEGER"


class DomainError(FinslerKatoError, ValueError):
    code = "OUT_OF_DOMAIN"


class ConvergenceError(FinslerKatoError, ArithmeticError):
    code = "NO_CONVERGENCE"


class OptimizerStall(FinslerKatoError, ArithmeticError):
    code = "OPTIMIZER_STALL"


class GradientTooSmall(FinslerKatoError, ValueError):
    code = "GRADIENT_TOO_SMALL"


class ParameterError(FinslerKatoError, ValueError):
    code = "PARAM_OUT_OF_RANGE"


class DegenerateCone(FinslerKatoError, ArithmeticError):
    code = "DEGENERATE_CONE"


class OriginSingularity(FinslerKatoError, ValueError):
    code = "ORIGIN_SINGULARITY"


class QuadratureNotConverged(FinslerKatoError, ArithmeticError):
    code = "QUADRATURE_NOT_CONVERGED"


class ZeroBoundaryTrace(FinslerKatoError, ArithmeticError):
    code = "ZERO_BOUNDARY_TRACE"
