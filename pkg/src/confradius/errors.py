"""Exception hierarchy shared by every module."""


class ConfRadiusError(Exception):
    """Base class for all library errors."""


class DomainError(ConfRadiusError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InvalidProbability(DomainError):
    """Confidence level not strictly inside (0, 1)."""


class NotPositiveSemidefinite(DomainError):
    """Covariance has an eigenvalue below the PSD tolerance (or is malformed)."""


class DegenerateCovariance(DomainError):
    """Covariance whose largest eigenvalue is zero."""


class DimensionMismatch(DomainError):
    """Shape ratios and table/operation disagree on dimension."""


class ToleranceNotReached(ConfRadiusError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""


class NoSignChange(ConfRadiusError, ArithmeticError):
    """Root bracket endpoints do not straddle zero."""


class MonotonicityViolation(ConfRadiusError, ArithmeticError):
    """A factor table decreased along one of its axes."""


class FormatError(ConfRadiusError, ValueError):
    """Serialized table is truncated, corrupt or of an unknown version."""
