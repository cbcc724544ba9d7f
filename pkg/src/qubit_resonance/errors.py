"""Exception and warning types raised across the package."""


class QubitResonanceError(Exception):
    """Base class for all package errors."""


class ValidationError(QubitResonanceError, ValueError):
    """Invalid input; ``path`` names the offending field when known."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalFailure(QubitResonanceError, ArithmeticError):
    """A numerical routine could not deliver the requested accuracy."""


class NonconformingProfile(ValidationError):
    pass


class DegenerateSystem(ValidationError):
    pass


class AmbiguousClustering(ValidationError):
    pass


class UnsupportedInitialState(ValidationError):
    pass


class PreconditionViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BudgetExceeded(ValidationError):
    def __init__(self, dim, budget):
        self.dim = dim
        self.budget = budget
        super().__init__(f"Hilbert-space dimension {dim} exceeds budget {budget}")


class RecurrenceViolation(ValidationError):
    def __init__(self, t_end, recurrence_time):
        self.t_end = t_end
        self.recurrence_time = recurrence_time
        super().__init__(
            f"fit window ends at t={t_end:.6g}, beyond half the bath recurrence "
            f"time ({recurrence_time:.6g} / 2 = {recurrence_time / 2:.6g})"
        )


class QuadratureFailure(NumericalFailure):
    pass


class EigendecompositionFailure(NumericalFailure):
    pass


class IllConditionedFit(NumericalFailure):
    pass


class TruncationWarning(UserWarning):
    """Thermal weight discarded by the Fock cutoff is not negligible."""


class ParseError(ValidationError):
    """The configuration text is not well-formed."""
