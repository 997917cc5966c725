"""Exception types shared across the package.

The CLI maps these onto process exit codes: config/domain problems -> 2,
numeric failures -> 3, sample-size refusals -> 4.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class ConvergenceError(RuntimeError):
    """A quadrature or series evaluation failed to reach its tolerance."""


class SampleSizeError(RuntimeError):
    """Too few samples to produce a statistically meaningful estimate."""


class RejectionBudgetError(RuntimeError):
    """Rejection sampler exhausted its draw budget (pathological geometry)."""


class GridMismatchError(ValueError):
    """Two curves were compared on different t-grids."""
