"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid model or configuration parameter."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or underflowed."""


class BudgetError(RuntimeError):
    """A rejection-sampling budget was exhausted."""

    def __init__(self, message: str, attempts: int = 0, accepted: int = 0):
        super().__init__(message)
        self.attempts = attempts
        self.accepted = accepted


class SamplingError(RuntimeError):
    """A sampler hit an internal cap and could not produce an exact draw."""


class StatisticsError(ValueError):
    """Degenerate input to a goodness-of-fit statistic."""
