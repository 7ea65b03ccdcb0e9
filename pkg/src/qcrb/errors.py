"""Exception hierarchy shared by every module of the package."""


class QcrbError(Exception):
    """Base class for all package errors."""


class DimensionError(QcrbError, ValueError):
    pass


class DomainError(QcrbError, ValueError):
    """Parameter or input outside the valid region of a model or function."""


class NumericalError(QcrbError, ArithmeticError):
    pass


class ValidationError(QcrbError, ValueError):
    """An object failed its invariants on construction or load."""


class SingularModelError(QcrbError):
    """A zero-probability outcome carries a nonzero probability derivative."""


class SingularStateError(QcrbError):
    pass


class SingularError(QcrbError):
    pass


class ResourceError(QcrbError):
    pass


class InfeasibleError(QcrbError):
    pass


class ConvergenceError(QcrbError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class DivergenceError(QcrbError):
    pass


class DegenerateBoundError(QcrbError):
    pass


class PriorError(QcrbError):
    pass


class UncertaintyError(QcrbError, ValueError):
    """A covariance matrix violates the uncertainty relation V >= (i/2) S."""


class DegeneracyError(QcrbError, ValueError):
    pass


class DegenerateDataError(QcrbError):
    pass
