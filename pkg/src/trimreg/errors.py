"""Exception types shared across the package."""


class TrimregError(Exception):
    """Base class for all trimreg errors."""


class DomainError(TrimregError, ValueError):
    """An argument lies outside the mathematically valid range."""


class DimensionMismatch(TrimregError, ValueError):
    """Array shapes are inconsistent with each other."""


class SingularMatrix(TrimregError, ArithmeticError):
    """A symmetric solve hit a pivot below tolerance (rank-deficient system)."""


class OnPieceBoundary(TrimregError):
    """The coefficient vector sits on a boundary between trimming pieces,
    where the objective gradient is undefined."""


class TooManySubsets(TrimregError):
    """Exhaustive enumeration would exceed the configured subset cap."""


class AllStartsDegenerate(TrimregError):
    """Every multi-start candidate hit a rank-deficient subset."""


class QuadratureFailure(TrimregError):
    """Numerical integration did not reach the requested accuracy."""


class ResampleExhausted(TrimregError):
    """Too many consecutive bootstrap resamples were solver-degenerate."""


class ParseError(TrimregError, ValueError):
    """A CSV input file could not be parsed."""


class NonNumericCell(ParseError):
    """A CSV cell expected to be numeric was not."""


class TooFewRows(ParseError):
    """The input has too few rows for its column count (needs n > 2p)."""
