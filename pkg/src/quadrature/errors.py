"""Error types shared by the quadrature, mixture and simulation packages."""


class InvalidInputError(ValueError):
    """Raised when arguments are malformed, empty or dimensionally inconsistent."""


class InputFormatError(InvalidInputError):
    """Raised when an input file cannot be parsed.

    Args:
        message: Description of the problem
        line: 1-based line number in the source file, if known
        column: 1-based column number in the source file, if known
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{location}")


class NumericalFailureError(ArithmeticError):
    """Raised when a computation breaks down numerically.

    Not a ValueError: callers distinguish bad input from a failed computation.
    """

    def __init__(self, message: str, jitter: float | None = None):
        self.jitter = jitter
        super().__init__(message)
