"""Exception hierarchy shared across the package."""


class SptError(Exception):
    """Base class for all errors raised by spt_decomp."""


class ValidationError(SptError, ValueError):
    """Input data or parameters violate a documented invariant."""


class AlignmentError(ValidationError):
    """Two paths were combined but do not share a time grid."""


class DomainError(SptError, ValueError):
    """A function was evaluated outside the region where it is defined."""


class IngestionError(ValidationError):
    """A capitalization file could not be parsed.

    ``row`` is the 1-based line number in the source (header is line 1),
    or None when the problem is not tied to a single line.
    """

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NumericalError(SptError, ArithmeticError):
    """A computation produced a value that cannot be used downstream."""


class NonPositiveValueError(NumericalError):
    def __init__(self, step, value):
        self.step = step
        self.value = value
        super().__init__(
            f"portfolio value became non-positive ({value!r}) at step {step}"
        )
