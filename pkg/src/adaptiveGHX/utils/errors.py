# Exceptions raised across the package.
# Every error can render itself as a machine-readable failure record (to_record),
# which is what the CLI writes to stderr before exiting with code 2 or 3.

import numpy as np


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


class AdaptiveGHXError(RuntimeError):
    """Base class for all adaptiveGHX failures."""

    exit_code = 3

    def __init__(self, message, **fields):
        super().__init__(message)
        self.message = message
        self.fields = fields

    def to_record(self):
        """
        Failure record for the CLI.
        Returns:
            dict with the error class name, the message and every structured field
        """
        record = {"error": type(self).__name__, "message": self.message}
        record.update({key: _jsonable(value) for key, value in self.fields.items()})
        return record


class DimensionError(AdaptiveGHXError):
    pass


class SingularMatrixError(AdaptiveGHXError):
    def __init__(self, message, pivot=None, **fields):
        super().__init__(message, pivot=pivot, **fields)
        self.pivot = pivot


class ConvergenceError(AdaptiveGHXError):
    def __init__(self, message, iterations=None, residual=None, **fields):
        super().__init__(message, iterations=iterations, residual=residual, **fields)
        self.iterations = iterations
        self.residual = residual


class NumericalError(AdaptiveGHXError):
    """Non-finite values or divergence inside a simulation."""

    def __init__(self, message, t=None, x=None, **fields):
        super().__init__(message, t=t, x=x, **fields)
        self.t = t
        self.x = x


class StabilityError(AdaptiveGHXError):
    pass


class ConfigError(AdaptiveGHXError):
    exit_code = 2

    def __init__(self, message, key=None, **fields):
        super().__init__(message, key=key, **fields)
        self.key = key


class ReferenceDataError(AdaptiveGHXError):
    exit_code = 2

    def __init__(self, message, row=None, **fields):
        super().__init__(message, row=row, **fields)
        self.row = row


class MatchingConditionError(AdaptiveGHXError):
    """A_h - A does not lie in the span of B."""
