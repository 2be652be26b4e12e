"""Exception hierarchy shared by the model, simulation and fitting code."""


class TmqiError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TmqiError, ValueError):
    pass


class DegenerateModelError(TmqiError, ArithmeticError):
    pass


class NoSolutionError(TmqiError, ValueError):
    pass


class EmptyTableError(TmqiError, ValueError):
    pass


class InsufficientStatisticsError(TmqiError, RuntimeError):
    pass


class ResourceLimitError(TmqiError, RuntimeError):
    pass


class ConvergenceError(TmqiError, RuntimeError):
    pass


class UnidentifiableError(TmqiError, ValueError):
    pass


class DegreesOfFreedomError(TmqiError, ValueError):
    pass
