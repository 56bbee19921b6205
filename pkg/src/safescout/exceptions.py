"""Exception types raised across the package."""


class DimensionMismatchError(ValueError):
    """A point does not live in the environment's space."""


class ReducibleChainError(ValueError):
    """The chain has more than one stationary distribution."""


class BudgetExceededError(ValueError):
    """An exhaustive computation would exceed the configured size limits."""


class MalformedLogError(ValueError):
    """A run log is incomplete or internally inconsistent."""
