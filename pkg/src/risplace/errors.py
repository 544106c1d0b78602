"""Exception types shared across the package."""


class RisplaceError(Exception):
    """Base class for all package-specific errors."""


class EmptyGrid(RisplaceError):
    """Coverage grid has no usable points (resolution too coarse)."""


class NonPositiveDistance(RisplaceError):
    """Path-loss evaluation requires a strictly positive distance."""


class CoincidentPoints(RisplaceError):
    """Two points that must be distinct coincide."""


class DimensionMismatch(RisplaceError):
    """Array shapes are inconsistent with the channel dimensions."""


class NonFiniteObjective(RisplaceError):
    """Solver objective became NaN/inf; the run is numerically invalid."""


class RejectionOverflow(RisplaceError):
    """User rejection sampling failed; region is buried in obstacles."""


class InfeasibleQuadrant(RisplaceError):
    """No candidate quadrant of the search circle admits a feasible point."""


class EmptyInput(RisplaceError):
    """An operation that needs a nonempty collection received an empty one."""


class ParseError(RisplaceError):
    """Scenario file is not syntactically valid."""


class ValidationError(RisplaceError):
    """Scenario file parsed but violates a schema or value constraint.

    Carries the dotted path of the offending field, e.g. ``obstacles[2].radius``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
