"""Exception hierarchy shared by every module of the package."""


class MeanError(Exception):
    """Base class for all domain errors raised by invmeans."""


class ArityMismatch(MeanError, ValueError):
    pass


class DomainViolation(MeanError, ValueError):
    pass


class ConstantInput(MeanError, ValueError):
    pass


class NotConverged(MeanError):
    """Iteration hit its budget; the partial report is attached."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotInvariant(MeanError):
    pass


class NoSolutionInRange(MeanError):
    def __init__(self, message, required=None, bounds=None):
        super().__init__(message)
        self.required = required
        self.bounds = bounds


class SIsFull(MeanError, ValueError):
    pass


class EmptySubset(MeanError, ValueError):
    pass


class NonInvariantRoot(MeanError, ValueError):
    pass


class BudgetExceeded(MeanError):
    pass


class ArithmeticOverflow(MeanError, ArithmeticError):
    pass
