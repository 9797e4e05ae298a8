"""Exception types shared across the package."""


class GrushinError(Exception):
    """Base class for all library errors."""


class ParameterError(GrushinError, ValueError):
    """A parameter lies outside the admissible range of an operation."""


class DomainError(GrushinError, ValueError):
    """Evaluation requested at a point where the quantity is undefined."""


class ModeIndexError(GrushinError, ValueError):
    """An eigenbasis mode index violates its parity/range constraints."""


class TruncationError(GrushinError):
    """A function is not resolved at the requested spectral truncation.

    ``residual`` carries the relative tail energy that triggered the error.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(GrushinError):
    """An integral requested by the caller diverges.

    ``exponent`` is the offending power-law exponent found by the endpoint test.
    """

    def __init__(self, message, exponent=None):
        super().__init__(message)
        self.exponent = exponent


class IllConditionedError(GrushinError):
    """A discretized linear system is too ill-conditioned to trust."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ZeroTestFunctionError(GrushinError):
    """Both sides of a weighted inequality vanish."""


class DegenerateFamilyError(GrushinError, ValueError):
    """A separable family whose angular factor has no mass under the requested weight."""
