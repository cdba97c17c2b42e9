"""Exception types raised across the package.

``BadInput`` marks errors caused by user-supplied data or configuration; the
CLI maps those to exit code 2 and everything else to 1.
"""


class ExplorationError(Exception):
    """Base class for all package errors."""


class BadInput(ExplorationError):
    """Raised for malformed files, configs or arguments."""


class DimensionMismatch(BadInput, ValueError):
    pass


class NonFinite(BadInput, ValueError):
    pass


class ConfigInvalid(BadInput, ValueError):
    pass


class ParseError(BadInput):
    pass


class OutOfBounds(ExplorationError, IndexError):
    pass


class IterationLimit(ExplorationError, RuntimeError):
    pass


class InvalidAction(ExplorationError, ValueError):
    pass


class SingularCovariance(ExplorationError, ArithmeticError):
    pass


class EmptyHistory(ExplorationError, ValueError):
    pass


class NoValidActions(ExplorationError, RuntimeError):
    pass


class InfeasibleBudget(ExplorationError, ValueError):
    pass


class DegenerateSample(ExplorationError, ValueError):
    pass
