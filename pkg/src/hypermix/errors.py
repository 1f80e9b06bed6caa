"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad inputs: malformed files, infeasible configurations, shape mismatches."""


class NumericalError(RuntimeError):
    """Numerical failure: diverged optimization, degenerate sampling."""
