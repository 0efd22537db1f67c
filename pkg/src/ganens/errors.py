"""Exception types and warning categories shared across the toolkit."""


class GanensError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(GanensError, ValueError):
    """An argument violates a documented precondition."""


class DataError(GanensError):
    """A file or in-memory dataset failed validation."""


class NumericError(GanensError):
    """A numerical routine failed to converge."""


class ShortfallWarning(UserWarning):
    """A generator held fewer rows than its sampling quota."""
