"""Exception hierarchy shared by all modules."""


class KHessianError(Exception):
    """Base class for errors raised by this package."""


class DomainError(KHessianError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class NotApplicableError(KHessianError):
    """The requested analysis does not apply to the given input."""


class TooFewPointsError(KHessianError, ValueError):
    pass


class QuadratureError(KHessianError, RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
