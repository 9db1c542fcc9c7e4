"""Exception hierarchy shared by all modules.

The CLI maps :class:`InputError` to exit code 2 and
:class:`NonConvergenceError` to exit code 3.
"""


class BladeProgError(Exception):
    """Base class for every error raised by this package."""


class InputError(BladeProgError, ValueError):
    """Invalid input: bad parameters, malformed files, failed validation."""


class DomainError(InputError):
    """An argument lies outside the domain of the operation."""


class CSVFormatError(InputError):
    """A CSV file could not be parsed or failed validation."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class DegenerateDataError(InputError):
    """Data carry no information about the requested quantity.

    ``mean_rate`` holds the mean-matching estimate c/u when it could still be
    computed (e.g. deterministic inspection data).
    """

    def __init__(self, message, mean_rate=None):
        self.mean_rate = mean_rate
        super().__init__(message)


class NonConvergenceError(BladeProgError, ArithmeticError):
    """An iterative solver failed to converge or to bracket its root."""

    def __init__(self, message, iterations=None):
        self.iterations = iterations
        if iterations is not None:
            message = f"{message} (after {iterations} iterations)"
        super().__init__(message)
