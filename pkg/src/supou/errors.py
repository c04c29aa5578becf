"""Exception hierarchy.

Three broad families, matching the CLI exit codes: model/config validation
(exit 2), numerical failures (exit 3) and precondition/checker failures
(exit 4).
"""


class SupOUError(Exception):
    """Base class for all package errors."""


class ValidationError(SupOUError):
    """Invalid argument, malformed config or model object."""


class UnsupportedModelError(ValidationError):
    """A model combination outside the supported families."""


class NumericalError(SupOUError):
    """A numerical routine failed to reach its advertised accuracy."""


class ConditioningError(NumericalError):
    """Ill-conditioned decomposition or linear solve."""


class BranchCutError(NumericalError):
    """Eigenvalue on the branch cut of the principal logarithm."""


class QuadratureError(NumericalError):
    """Node-doubling quadrature failed to converge."""


class TruncationError(NumericalError):
    """Stationarity truncation horizon grew beyond the feasibility cap."""


class PreconditionError(SupOUError):
    """A documented precondition of an operation does not hold."""


class StabilityError(PreconditionError):
    """Matrix is not stable (spectral abscissa >= 0)."""


class ModeMismatchError(PreconditionError):
    """Requested decay-bound mode does not apply to the matrix."""


class MomentError(PreconditionError):
    """Required moment condition fails."""


class PathConditionError(PreconditionError):
    """Required path-regularity condition fails."""


class NeedsAtomsError(PreconditionError):
    """Operation requires a path bundle with retained atoms."""


class DataError(PreconditionError):
    """Input data too short or otherwise unusable."""


class FitFailureError(SupOUError):
    """Nonlinear least-squares fit could not improve on a degenerate curve."""
