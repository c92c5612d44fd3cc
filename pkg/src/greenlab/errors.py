"""Exception types shared across the library."""


class GreenLabError(Exception):
    """Base class for all library-specific errors."""


class DomainError(GreenLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedManifoldError(GreenLabError, ValueError):
    """The requested operation is not defined for this manifold."""


class SingularityError(GreenLabError, ValueError):
    """Evaluation was requested at a point where the quantity diverges."""


class QuadratureError(GreenLabError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the last estimate and its error bound so callers can decide
    whether the partial result is still usable.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound
