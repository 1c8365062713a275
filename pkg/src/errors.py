"""
Error types for the form-inequality lab.
Library code raises these; the command line maps them onto exit codes.
"""


class FormLabError(Exception):
    """Base class for every error raised by the lab"""


class InvalidInputError(FormLabError, ValueError):
    """Malformed or out-of-domain input (exit code 2)"""


class ParseError(InvalidInputError):
    """Syntax error in a form expression"""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class ExpressionError(FormLabError):
    """Expression could not be evaluated at a sample point"""


class NumericFailure(FormLabError, ArithmeticError):
    """Non-finite value or a broken internal invariant (exit code 3)"""
