"""Exception hierarchy shared across the package.

The CLI maps ``DataError`` subclasses to exit code 2 and ``NumericError``
subclasses to exit code 3.
"""


class ChronocastError(Exception):
    pass


class DataError(ChronocastError):
    pass


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ImputationError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class RegistryError(DataError):
    pass


class CompatibilityError(DataError):
    pass


class ConfigError(ChronocastError):
    pass


class ShapeError(ChronocastError, ValueError):
    pass


class DomainError(ChronocastError, ValueError):
    pass


class NumericError(ChronocastError):
    pass


class DivergenceError(NumericError):
    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class ConvergenceError(NumericError):
    """Raised when an iterative fit hits its iteration cap.

    ``best`` carries the best-so-far result so callers can still use it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SelectionError(NumericError):
    pass


class SearchError(NumericError):
    pass
