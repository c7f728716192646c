"""Exception types shared across the package."""


class BoundsError(ValueError):
    """A parameter lies outside its admissible range."""


class NonPlanarError(ValueError):
    """A matching of boundary indices contains crossing links."""


class DomainError(ValueError):
    """A point lies outside the domain an operation is defined on."""


class SingularityError(ValueError):
    """Evaluation at a singular configuration (coinciding points)."""


class NonSmoothBoundaryError(ValueError):
    """A boundary point sits at a corner where the kernel is undefined."""


class SwallowedError(ArithmeticError):
    """A point was swallowed by the Loewner hull."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class DegenerateSegmentError(ValueError):
    """A zipper step produced zero capacity."""


class ResolutionError(ValueError):
    """Lattice resolution too coarse for the requested marks."""


class TracingError(RuntimeError):
    """An interface or loop violated a structural invariant."""


class GeometryError(RuntimeError):
    """A conformal component could not be constructed."""


class ProviderError(ArithmeticError):
    """A partition-function provider returned an invalid value."""


class NumericalBlowupError(ArithmeticError):
    """An SDE integration collapsed before its stopping time."""


class StatisticsError(RuntimeError):
    """Not enough usable samples for a statistic."""
