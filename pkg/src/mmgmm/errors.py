"""Exception types raised across the package."""


class GMMError(Exception):
    """Base class for all errors raised by mmgmm."""


class DimensionMismatch(GMMError, ValueError):
    pass


class NotSymmetric(GMMError, ValueError):
    pass


class NotPositiveDefinite(GMMError, ValueError):
    """A matrix that should be SPD has a non-positive Cholesky pivot."""


class NonPositiveWeight(GMMError, ValueError):
    pass


class EmptyInput(GMMError, ValueError):
    pass


class DegenerateComponent(GMMError, RuntimeError):
    """A component lost all of its mass or its covariance could not be factorized."""


class TooFewSamples(GMMError, ValueError):
    pass


class ParseError(GMMError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyFile(GMMError, ValueError):
    pass


class RaggedRows(GMMError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(GMMError, ValueError):
    pass
