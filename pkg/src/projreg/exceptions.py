"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for malformed input
and :class:`NumericalError` for inputs that are well formed but numerically
degenerate. The CLI maps them to exit codes 2 and 3.
"""


class ProjregError(Exception):
    """Base class for all package errors."""


class ValidationError(ProjregError, ValueError):
    pass


class NumericalError(ProjregError, ArithmeticError):
    pass


class NonFiniteError(ValidationError):
    """Input contains NaN or Inf."""


class NonPositiveAlphaError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class EmptySetError(ValidationError):
    pass


class BadDimensionsError(ValidationError):
    pass


class TruncationTooLargeError(ValidationError):
    pass


class NoTruthError(ValidationError):
    """A check needs the true operator or ground truth and it is missing."""


class RankZeroError(NumericalError):
    pass


class NotInjectiveError(NumericalError):
    """The learned operator is not injective on the Cameron-Martin space."""
