"""Exception types raised across the package."""


class UQSLError(Exception):
    """Base class for all errors raised by uqsl."""


class NotSquare(UQSLError, ValueError):
    pass


class NotHermitian(UQSLError, ValueError):
    pass


class TraceNotOne(UQSLError, ValueError):
    pass


class NegativeEigenvalue(UQSLError, ValueError):
    pass


class DimensionMismatch(UQSLError, ValueError):
    pass


class InvalidOrder(UQSLError, ValueError):
    pass


class MatrixOverflow(UQSLError, ArithmeticError):
    pass


class InvalidAlpha(UQSLError, ValueError):
    pass


class InvalidParams(UQSLError, ValueError):
    pass


class SingularState(UQSLError, ValueError):
    """The state has an eigenvalue at or below the numerical floor."""


class QuadratureFailure(UQSLError, ArithmeticError):
    pass


class DomainError(UQSLError, ValueError):
    pass


class EmptyTrajectory(UQSLError, ValueError):
    pass


class EmptyInput(UQSLError, ValueError):
    pass


class ZeroDenominator(UQSLError, ArithmeticError):
    pass


class CompletenessViolation(UQSLError, ValueError):
    pass


class DerivativeUnavailable(UQSLError, ValueError):
    pass


class VanishingNorm(UQSLError, ArithmeticError):
    pass


class SizeLimit(UQSLError, ValueError):
    pass


class ConfigError(UQSLError, ValueError):
    """Bad scenario configuration. The message names the offending key."""
