"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration. Carries the full violation list."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ResourceLimitError(RuntimeError):
    """A requested object would exceed a configured resource cap."""


class PropagationError(RuntimeError):
    """Time stepping could not reach the requested accuracy."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge within its iteration budget."""


class FrontUnresolvedError(RuntimeError):
    """The time grid is too coarse to resolve the signal front."""
