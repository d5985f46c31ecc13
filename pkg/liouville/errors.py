"""Exception hierarchy for liouville.

Two families map onto the CLI exit codes:
- ValidationError: a precondition was violated (exit 2)
- NumericalError: a computation could not be trusted (exit 3)
"""


class LiouvilleError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(LiouvilleError, ValueError):
    """Input violates the preconditions of an operation."""


class NumericalError(LiouvilleError, ArithmeticError):
    """A numerical procedure failed its own consistency check."""


class ConfigError(ValidationError):
    """Malformed configuration file or flag value."""


# Geometry

class OutOfDomainError(ValidationError):
    """Point is not in the interior of the domain."""


class CoincidentPointsError(ValidationError):
    """Green function requested on the diagonal."""


class PoleError(NumericalError):
    """Conformal map evaluated at (or too near) its pole."""


class InsufficientModesError(NumericalError):
    """Richardson extrapolants disagree; the mode sum is not resolved."""


# Field

class UnsupportedDomainError(ValidationError):
    """Sampling requested on a domain without a spectral basis."""


class BoundaryProximityError(ValidationError):
    """Averaging circle leaves the domain."""


class ModeRangeError(ValidationError):
    """Projection index outside 1..n_modes."""


# Paths

class StartTooCloseError(ValidationError):
    """Path start lies within the stopping margin."""


class NetFinerThanPathError(ValidationError):
    """Net spacing smaller than the path step."""


class LagExceedsDurationError(ValidationError):
    """Requested lag is longer than the stopped path."""


# Clock

class EpsilonExceedsMarginError(ValidationError):
    """Circle radius exceeds the stopping margin."""


class DtTooCoarseError(ValidationError):
    """Path step violates dt <= epsilon**2 / 16."""


class TauBeyondRangeError(ValidationError):
    """Quantum time outside [0, final clock value]."""


# Scaling fields

class BudgetExceededError(ValidationError):
    """Too many sample points for dense factorisation."""


class NotPositiveSemidefiniteError(NumericalError):
    """Covariance matrix has a significantly negative eigenvalue."""


class QuadratureError(NumericalError):
    """Two quadrature refinement levels disagree."""


# Analysis

class NoRootError(NumericalError):
    """KPZ quadratic has no root in [0, 1]."""


class ScaleFinerThanPathError(ValidationError):
    """No cover scale has net spacing above the path step."""


class UnsupportedMapError(ValidationError):
    """Conformal check requested for a map other than a rotation."""
