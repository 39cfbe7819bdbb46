"""Exception hierarchy shared by all interpnw modules."""


class InterpNWError(Exception):
    """Base class for every error raised by this package."""


class InputError(InterpNWError):
    """Invalid data, configuration or parameters supplied by the caller."""


class NumericError(InterpNWError):
    """A numerical procedure could not produce a meaningful result."""


# kernels
class ExponentTooLarge(InputError):
    pass


# estimator
class DomainError(InputError):
    pass


class InvalidBandwidth(InputError):
    pass


class EmptyDataset(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NonFiniteQuery(InputError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NonBinaryResponses(InputError):
    pass


class DataFormatError(InputError):
    """Malformed CSV input; ``row`` is the 1-based line number when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


# datagen
class UnknownScenario(InputError):
    pass


class InvalidParams(InputError):
    pass


class OutOfSupport(InputError):
    pass


class MissingGradient(InputError):
    pass


# experiments
class InsufficientPoints(NumericError):
    pass


class NonPositiveValue(NumericError):
    pass


class DegenerateMSE(NumericError):
    pass


class NonResampleableNoise(InputError):
    pass


class AnalyticUnavailable(InterpNWError):
    pass


# cli
class ConfigError(InputError):
    pass


class UnsupportedDimension(InputError):
    pass
