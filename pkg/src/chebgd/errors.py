"""Exception hierarchy shared by all modules."""


class ChebGDError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(ChebGDError):
    pass


class DegenerateShift(ChebGDError):
    pass


class DegenerateSpectrum(ChebGDError):
    pass


class DimensionMismatch(ChebGDError, ValueError):
    pass


class ShapeMismatch(DimensionMismatch):
    pass


class ScheduleEmpty(ChebGDError, ValueError):
    pass


class SizeLimitExceeded(ChebGDError):
    pass


class InvalidParams(ChebGDError, ValueError):
    pass


class SingularSystem(ChebGDError):
    pass


class ConfigError(ChebGDError):
    pass


class DataError(ChebGDError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.row = row
        self.column = column


class EmptyAfterCleaning(DataError):
    pass


class DegenerateSpectrumWarning(UserWarning):
    pass
