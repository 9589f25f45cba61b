"""Exception hierarchy shared by every module of the package."""


class TropconfError(Exception):
    """Base class for all package errors."""


class DivisionByBottom(TropconfError, ArithmeticError):
    """Tropical division (subtraction) by -inf."""


class UnboundVariable(TropconfError, KeyError):
    def __str__(self):
        return f"unbound variable {self.args[0]!r}"


class DSLSyntaxError(TropconfError, ValueError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredName(TropconfError, ValueError):
    pass


class NonIntegerExponent(DSLSyntaxError):
    pass


class NotSubtractionFree(TropconfError, ValueError):
    pass


class ZeroAssignment(TropconfError, ValueError):
    pass


class OverflowAtEpsilon(TropconfError, OverflowError):
    pass


class DivisionByZeroSeries(TropconfError, ZeroDivisionError):
    pass


class IndeterminateLeadingTerm(TropconfError, ArithmeticError):
    """All known terms cancelled, so the leading term is unknown."""


class IndeterminateValuation(IndeterminateLeadingTerm):
    """Valuation requested of a series whose known window is empty."""


class DivisionByZeroFunction(TropconfError, ZeroDivisionError):
    pass


class ZeroFunction(TropconfError, ArithmeticError):
    pass


class IndeterminateOrbit(TropconfError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class SignMismatch(TropconfError, ValueError):
    pass


class ScenarioError(TropconfError, ValueError):
    pass
