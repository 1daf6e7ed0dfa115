"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, material, target or run configuration."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed to reach its tolerance.

    Carries the residual history of the failed solve in ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class NumericalConsistencyError(RuntimeError):
    """A quantity that must be real/consistent came back outside tolerance."""
