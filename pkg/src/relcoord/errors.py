"""Exception types shared across the package."""


class RelcoordError(Exception):
    """Base class for package errors."""


class ValidationError(RelcoordError, ValueError):
    """An argument violates an operation's preconditions."""


class FormatError(RelcoordError, ValueError):
    """A file does not follow the expected on-disk format."""


class NumericError(RelcoordError, ArithmeticError):
    """Non-finite input to a numerical routine."""


class DivergenceError(NumericError):
    """A simulated state left the stable range."""


class TruncatedFileError(RelcoordError, OSError):
    """A file ended before its declared payload."""
