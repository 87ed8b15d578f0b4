"""Exception types raised by qdeflate."""


class QDeflateError(Exception):
    """Base class for all library errors."""


class DimensionError(QDeflateError, ValueError):
    """Operands have incompatible qubit counts or vector/matrix sizes."""


class CapacityError(QDeflateError, ValueError):
    """A request exceeds a configured size cap (dense matrices, groups, expansions)."""


class DomainError(QDeflateError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ContractError(QDeflateError, ValueError):
    """An input violates a documented precondition (e.g. non-Hermitian matrix)."""


class ConvergenceError(QDeflateError, ArithmeticError):
    """An iterative solver ran out of budget before converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ParseError(QDeflateError, ValueError):
    """A data file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line
