"""Exact max-plus semiring arithmetic.

Finite tropical values are :class:`fractions.Fraction` instances; the bottom
element is the singleton :data:`NEG_INF`, which compares below every finite
value.  Expressions (:class:`TropExpr` trees) are evaluated by
:func:`eval_trop`, or over any other max-plus-like algebra (jets,
piecewise-linear functions, ...) by :func:`evaluate`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Mapping, Union

from .errors import DivisionByBottom, UnboundVariable

__all__ = [
    "NEG_INF", "NegInfType", "TropicalValue", "as_trop", "is_neg_inf",
    "trop_add", "trop_mul", "trop_div", "trop_scale", "format_trop",
    "TropExpr", "Lit", "Var", "Max", "Plus", "Minus", "IntScale",
    "TropicalAlgebra", "TROPICAL", "evaluate", "eval_trop", "free_names",
]


@total_ordering
class NegInfType:
    """The bottom element -inf of the max-plus semiring."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __str__(self):
        return "-inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("tropconf.NEG_INF")

    def __lt__(self, other):
        return other is not self

    def __reduce__(self):
        return (NegInfType, ())


NEG_INF = NegInfType()

TropicalValue = Union[Fraction, NegInfType]


def is_neg_inf(x) -> bool:
    return x is NEG_INF


def as_trop(x) -> TropicalValue:
    """Coerce ints, Fractions, rational strings and '-inf' to a tropical value."""
    if x is NEG_INF:
        return x
    if isinstance(x, str):
        s = x.strip()
        if s in ("-inf", "-oo", "NegInf"):
            return NEG_INF
        return Fraction(s)
    if isinstance(x, float):
        raise TypeError("tropical values must be exact; got a float")
    return Fraction(x)


def trop_add(a: TropicalValue, b: TropicalValue) -> TropicalValue:
    """Tropical sum: max(a, b)."""
    if a is NEG_INF:
        return b
    if b is NEG_INF:
        return a
    return a if a >= b else b


def trop_mul(a: TropicalValue, b: TropicalValue) -> TropicalValue:
    """Tropical product: a + b, with -inf absorbing."""
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a + b


def trop_div(a: TropicalValue, b: TropicalValue) -> TropicalValue:
    """Tropical quotient: a - b.  Raises DivisionByBottom when b is -inf."""
    if b is NEG_INF:
        raise DivisionByBottom("tropical division by -inf")
    if a is NEG_INF:
        return NEG_INF
    return a - b


def trop_scale(k: int, a: TropicalValue) -> TropicalValue:
    """Tropical power a^k, i.e. k*a.

    0 * -inf is 0 (the empty tropical product); a negative multiple of -inf
    is a division by the bottom element and raises.
    """
    if a is NEG_INF:
        if k > 0:
            return NEG_INF
        if k == 0:
            return Fraction(0)
        raise DivisionByBottom(f"{k} * -inf")
    return k * a


def format_trop(x: TropicalValue) -> str:
    return "-inf" if x is NEG_INF else str(x)


# -- expression trees ---------------------------------------------------------

class TropExpr:
    """Base class for tropically rational expression nodes."""

    __slots__ = ()

    def __str__(self):
        return _fmt(self, 0)


@dataclass(frozen=True)
class Lit(TropExpr):
    value: TropicalValue


@dataclass(frozen=True)
class Var(TropExpr):
    name: str


@dataclass(frozen=True)
class Max(TropExpr):
    args: tuple

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Max needs at least two operands")


@dataclass(frozen=True)
class Plus(TropExpr):
    args: tuple

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("Plus needs at least two operands")


@dataclass(frozen=True)
class Minus(TropExpr):
    left: TropExpr
    right: TropExpr


@dataclass(frozen=True)
class IntScale(TropExpr):
    k: int
    arg: TropExpr

    def __post_init__(self):
        if not isinstance(self.k, int):
            raise TypeError("IntScale coefficient must be an int")


_PREC = {Max: 3, Var: 3, Lit: 3, IntScale: 2, Plus: 1, Minus: 1}


def _fmt(e: TropExpr, outer: int) -> str:
    if isinstance(e, Lit):
        s = format_trop(e.value)
        return f"({s})" if outer and s.startswith("-") else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Max):
        return "max(" + ", ".join(_fmt(a, 0) for a in e.args) + ")"
    if isinstance(e, Plus):
        s = " + ".join(_fmt(a, 1) for a in e.args)
    elif isinstance(e, Minus):
        s = f"{_fmt(e.left, 1)} - {_fmt(e.right, 2)}"
    elif isinstance(e, IntScale):
        s = f"{e.k}*{_fmt(e.arg, 2)}"
    else:
        raise TypeError(f"not a tropical expression: {e!r}")
    return f"({s})" if outer > _PREC[type(e)] or (outer == 2 and isinstance(e, IntScale)) else s


def free_names(e: TropExpr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Lit):
        return set()
    if isinstance(e, (Max, Plus)):
        return set().union(*(free_names(a) for a in e.args))
    if isinstance(e, Minus):
        return free_names(e.left) | free_names(e.right)
    if isinstance(e, IntScale):
        return free_names(e.arg)
    raise TypeError(f"not a tropical expression: {e!r}")


# -- evaluation -----------------------------------------------------------------

class TropicalAlgebra:
    """Operations used by :func:`evaluate`; subclass for other carriers."""

    def lit(self, value):
        return value

    def max(self, a, b):
        return trop_add(a, b)

    def plus(self, a, b):
        return trop_mul(a, b)

    def minus(self, a, b):
        return trop_div(a, b)

    def scale(self, k, a):
        return trop_scale(k, a)


TROPICAL = TropicalAlgebra()


def evaluate(expr: TropExpr, env: Mapping, algebra: TropicalAlgebra = TROPICAL):
    """Evaluate ``expr`` bottom-up with the operations of ``algebra``."""
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise UnboundVariable(expr.name) from None
    if isinstance(expr, Lit):
        return algebra.lit(expr.value)
    if isinstance(expr, Max):
        args = expr.args
        acc = evaluate(args[0], env, algebra)
        for a in args[1:]:
            acc = algebra.max(acc, evaluate(a, env, algebra))
        return acc
    if isinstance(expr, Plus):
        args = expr.args
        acc = evaluate(args[0], env, algebra)
        for a in args[1:]:
            acc = algebra.plus(acc, evaluate(a, env, algebra))
        return acc
    if isinstance(expr, Minus):
        return algebra.minus(evaluate(expr.left, env, algebra),
                             evaluate(expr.right, env, algebra))
    if isinstance(expr, IntScale):
        return algebra.scale(expr.k, evaluate(expr.arg, env, algebra))
    raise TypeError(f"not a tropical expression: {expr!r}")


def eval_trop(expr: TropExpr, env: Mapping[str, TropicalValue]) -> TropicalValue:
    return evaluate(expr, env, TROPICAL)
