"""Exception hierarchy.

``ValidationError`` covers violated preconditions (bad parameters, rejected
operator/domain pairings); ``NumericalError`` covers failures of the numerics
themselves (non-convergence, overflow that cannot be reported in-band).
"""


class SaeError(Exception):
    """Base class for all errors raised by saelab."""


class ValidationError(SaeError, ValueError):
    """A precondition of an operation was violated."""


class NumericalError(SaeError, RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """An iterative routine hit its iteration cap."""
