"""Exception types raised across the package."""


class HoprError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HoprError, ValueError):
    """Input data violates a documented precondition."""


class DimensionError(InvalidInputError):
    """Operand shapes do not agree."""


class ConfigError(HoprError, ValueError):
    """Solver or CLI configuration is invalid."""


class UnsupportedSizeError(HoprError, ValueError):
    """Problem is too large for an exhaustive or dense routine."""


class FormatError(HoprError, ValueError):
    """A file does not follow the expected on-disk format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
