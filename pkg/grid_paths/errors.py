"""Exception types shared by every package of the lab."""


class LabError(Exception):
    """Base class for errors raised by the lab."""


class GridResourceError(LabError, ValueError):
    """A requested grid is larger than the configured cap."""


class StructuralError(LabError, ValueError):
    """Objects that must share a grid, shape or ordering do not."""


class DomainError(LabError, ValueError):
    """A parameter lies outside the domain of the model or operation."""


class InvariantViolation(LabError, AssertionError):
    """A postcondition failed after construction. Always a bug."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its iteration cap."""
