"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`CoarctaError`
so the CLI can map failures onto exit codes.
"""


class CoarctaError(Exception):
    """Base class for package errors."""


class ConfigError(CoarctaError):
    """Bad or missing configuration value."""


class DataError(CoarctaError):
    """Input data cannot be used as given."""


class ParseError(DataError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class InsufficientDataError(DataError):
    pass


class DegenerateTraceError(DataError):
    pass


class InsufficientPeaksError(DataError):
    pass


class InvalidStepCountError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class SplitError(DataError):
    pass


class EncodingError(DataError):
    """Category not present in a fitted encoding map."""


class DomainError(DataError):
    pass


class NumericError(CoarctaError):
    """A numerical procedure could not produce a valid result."""


class SingularDesignError(NumericError):
    pass


class ModelSpecError(ConfigError):
    pass


class TransformMismatchError(CoarctaError):
    pass


class GridMismatchError(DataError):
    pass


class BoundaryConditionError(CoarctaError):
    pass


class UndefinedDeviationError(NumericError):
    pass
