"""Exception types shared across the package."""


class LdpreprError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LdpreprError, ValueError):
    """A value passed to an operation is out of its valid domain."""


class ShapeError(LdpreprError, ValueError):
    """An array or bit sequence has the wrong length or dimensionality."""


class ParseError(LdpreprError, ValueError):
    """A data or config file is malformed.

    Carries the 1-based line number at which parsing failed.
    """

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class DivergenceError(LdpreprError, ArithmeticError):
    """Training produced a non-finite loss."""
