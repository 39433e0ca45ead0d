"""Exception types shared across the package.

The CLI maps each family to a stable exit code, see ``pathlim.cli``.
"""


class PathlimError(Exception):
    """Base class for all errors raised by pathlim."""


class InputError(PathlimError, ValueError):
    """Malformed user input: bad edge-list, unknown vertex, invalid path."""


class ParseError(InputError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnknownVertexError(InputError):
    pass


class InvalidPathError(InputError):
    pass


class DegenerateError(PathlimError):
    """The digraph (or the part reachable from a vertex) has spectral radius 0."""


class PreconditionError(PathlimError, ValueError):
    """An operation was called outside of its domain of validity."""


class RangeError(PreconditionError):
    """A numeric argument (typically the Boltzmann parameter) is out of range."""


class NotUmbrellaError(PreconditionError):
    pass


class NoPathError(PreconditionError):
    pass


class NumericError(PathlimError, ArithmeticError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class CapExceededError(PathlimError):
    pass
