class EdgePostError(Exception):
    """Base class for all errors raised by edgepost."""


class DatasetParseError(EdgePostError, ValueError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class CapExceededError(EdgePostError, ValueError):
    """Problem size is above the configured node cap or a brute-force guard."""


class ScoreOverflowError(EdgePostError, OverflowError):
    """Parent-configuration count does not fit the counting table."""


class BinomialOverflowError(EdgePostError, OverflowError):
    pass


class PreconditionError(EdgePostError, ValueError):
    pass


class DimensionMismatchError(EdgePostError, ValueError):
    pass
