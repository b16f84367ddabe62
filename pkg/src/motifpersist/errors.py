"""Exception types raised across the package.

Every error raised by this package derives from :class:`MotifPersistError`,
so callers (and the CLI) can catch one base class and still report the
failing subsystem by exception type.
"""


class MotifPersistError(Exception):
    """Base class for all package errors."""


class ParseError(MotifPersistError):
    """A raw input file could not be parsed (carries a line number)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(MotifPersistError):
    """Input data violates a domain invariant (e.g. non-positive price)."""


class InsufficientDataError(MotifPersistError):
    """Not enough observations to perform the requested computation."""


class DimensionError(MotifPersistError):
    """Mismatched series / weight lengths."""


class BoundsError(MotifPersistError):
    """Index range falls outside the available data."""


class ParameterError(MotifPersistError):
    """A parameter value is outside its admissible range."""


class SizeError(MotifPersistError):
    """The problem instance is too small (e.g. fewer than 4 vertices)."""


class ConfigurationError(MotifPersistError):
    """A run configuration is internally inconsistent or infeasible."""


class ScenarioError(MotifPersistError):
    """A synthetic scenario specification is invalid."""


class DegenerateAssetError(MotifPersistError):
    """An asset has a degenerate statistic (zero volatility, constant price)."""


class SplitError(MotifPersistError):
    """An estimation/evaluation split has an empty or overlapping range."""
