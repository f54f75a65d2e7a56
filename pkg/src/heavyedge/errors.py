"""Exception hierarchy shared by all modules.

``DomainError`` covers caller mistakes (bad parameters, infeasible
configurations); the CLI maps it to exit code 1. Anything else that escapes
is treated as an internal error (exit code 2).
"""


class DomainError(ValueError):
    """Invalid input or parameter combination supplied by the caller."""


class InvalidParameterError(DomainError):
    """A parameter lies outside its mathematical domain."""


class InfeasibleVarianceError(DomainError):
    """The requested tail is too heavy for a unit-variance law; raise x0."""


class OutOfRangeError(DomainError):
    """Argument outside the tabulated/supported range."""


class DuplicateSiteError(DomainError):
    """The same matrix site was specified more than once."""


class RetryCapExceededError(RuntimeError):
    """A rejection-sampling loop hit its retry cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach the requested tolerance."""
