"""Exception types raised across the package."""


class SplitwaveError(Exception):
    """Base class for all package-specific errors."""


class OddPointCount(SplitwaveError):
    """Grid point count is not an even integer >= 4."""


class DegenerateInterval(SplitwaveError):
    """Axis interval has b <= a."""


class UnsupportedDimension(SplitwaveError):
    """Only 1D and 2D grids are supported."""


class ShapeMismatch(SplitwaveError):
    """Array shape does not match the grid."""


class OracleScaleExceeded(SplitwaveError):
    """Dense-matrix oracle requested beyond its size limit."""


class EigendecompositionFailure(SplitwaveError):
    """Hermitian eigendecomposition did not converge."""


class NonconvergentSeries(SplitwaveError):
    """Zeta-series exponent outside the convergent range."""


class NoAdmissibleStepInRadius(SplitwaveError):
    """No admissible step size within the requested search radius."""


class NonFiniteField(SplitwaveError):
    """A NaN or Inf appeared during time stepping."""

    def __init__(self, message, step=None, node=None):
        super().__init__(message)
        self.step = step
        self.node = node


class TimeAlignmentError(SplitwaveError):
    """Requested time is not an integer multiple of the step size."""


class GridIncompatible(SplitwaveError):
    """Grids do not share a domain or are not nested refinements."""


class TimeMismatch(SplitwaveError):
    """Snapshot times of two runs do not line up."""


class DegenerateFit(SplitwaveError):
    """Not enough spread in the data to fit a slope."""


class ConfigError(SplitwaveError):
    """Invalid or unparsable run configuration."""
