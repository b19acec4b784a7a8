"""Exception hierarchy for mebagg."""


class MebaggError(Exception):
    """Base class for all mebagg errors."""


class EmptyInputError(MebaggError):
    """An operation received an empty point set."""


class DimensionMismatchError(MebaggError):
    """Vectors of different dimensions were mixed in one operation."""


class InvalidFaultBudgetError(MebaggError):
    """The fault budget t is out of range for the given n."""


class TooManySubsetsError(MebaggError):
    """Subset enumeration would exceed the configured cap."""


class NonConvergenceError(MebaggError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class ResilienceViolationError(MebaggError):
    """n <= 2t: the requested guarantee needs an honest majority."""


class InvalidTangentConfigurationError(MebaggError):
    """The supplied bends do not correspond to mutually tangent balls."""


class ConflictingZeroRadiusError(MebaggError):
    """Multiple zero-radius candidate balls with distinct centers."""


class ZeroRadiusError(MebaggError):
    """A relative-distance ratio was requested against a zero-radius ball."""


class InstanceTooLargeError(MebaggError):
    """A brute-force oracle was invoked beyond its size caps."""


class InvalidParamsError(MebaggError):
    """Scenario or generator parameters violate their constraints."""


class ParseError(MebaggError):
    """Input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


# Errors that indicate a rejected input rather than an internal failure.
# The CLI maps these to exit code 2.
VALIDATION_ERRORS = (
    InvalidFaultBudgetError,
    ResilienceViolationError,
    TooManySubsetsError,
    InvalidParamsError,
    ConflictingZeroRadiusError,
)
