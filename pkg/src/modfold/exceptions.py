"""Exception hierarchy shared by all modfold modules."""


class ModfoldError(Exception):
    """Base class for every error raised by modfold."""


class DomainError(ModfoldError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class UsageError(ModfoldError, ValueError):
    """Inconsistent or invalid arguments (sizes, windows, schedules...)."""


class NumericalError(ModfoldError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""


class InfeasibleError(ModfoldError):
    """No integer fold correction within budget explains the samples."""

    def __init__(self, message, *, best_residual=None, peaks_tried=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.peaks_tried = peaks_tried
