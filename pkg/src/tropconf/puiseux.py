"""Truncated Puiseux series with exact rational coefficients.

A series is stored as terms ``(exponent, coefficient)`` in strictly
descending exponent order together with a threshold ``tau``: every term
with exponent ``>= tau`` is known exactly, and the unknown remainder only
involves exponents strictly below ``tau``.  ``tau = NEG_INF`` marks an exact
(finite) sum.  The valuation is the LARGEST exponent with a nonzero
coefficient, so that ``valuation(z**q) == q``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .errors import DivisionByZeroSeries, IndeterminateLeadingTerm, IndeterminateValuation
from .maxplus import NEG_INF, TropicalValue, format_trop

__all__ = [
    "DEFAULT_DEPTH", "PuiseuxSeries", "ps_add", "ps_neg", "ps_mul", "ps_inv",
    "valuation", "leading_coeff", "parse_series", "PuiseuxField",
]

DEFAULT_DEPTH = Fraction(64)


def _tadd(a, b):
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a + b


def _tmax(a, b):
    if a is NEG_INF:
        return b
    if b is NEG_INF:
        return a
    return a if a >= b else b


class PuiseuxSeries:
    __slots__ = ("terms", "tau")

    def __init__(self, terms: Iterable = (), tau: TropicalValue = NEG_INF):
        tau = tau if tau is NEG_INF else Fraction(tau)
        acc = {}
        for e, c in terms:
            e = Fraction(e)
            acc[e] = acc.get(e, 0) + Fraction(c)
        items = sorted(((e, c) for e, c in acc.items() if c != 0 and (tau is NEG_INF or e >= tau)),
                       reverse=True)
        self.terms = tuple(items)
        self.tau = tau

    @classmethod
    def _raw(cls, terms, tau):
        # trusted constructor: terms already canonical
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.tau = tau
        return obj

    # -- constructors ---------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls._raw((), NEG_INF)

    @classmethod
    def one(cls):
        return cls.monomial(1, 0)

    @classmethod
    def const(cls, c):
        return cls.monomial(c, 0)

    @classmethod
    def monomial(cls, coeff, exponent):
        coeff = Fraction(coeff)
        if coeff == 0:
            return cls.zero()
        return cls._raw(((Fraction(exponent), coeff),), NEG_INF)

    # -- inspection -------------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.tau is NEG_INF

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.tau is NEG_INF

    @property
    def is_determinate(self) -> bool:
        return bool(self.terms) or self.tau is NEG_INF

    def top(self) -> TropicalValue:
        """Upper bound for every exponent present: the valuation, or tau if unknown."""
        return self.terms[0][0] if self.terms else self.tau

    def valuation(self) -> TropicalValue:
        if self.terms:
            return self.terms[0][0]
        if self.tau is NEG_INF:
            return NEG_INF
        raise IndeterminateValuation(
            f"no known terms above threshold {format_trop(self.tau)}")

    def leading_coeff(self) -> Fraction:
        if self.terms:
            return self.terms[0][1]
        if self.tau is NEG_INF:
            raise DivisionByZeroSeries("the zero series has no leading coefficient")
        raise IndeterminateValuation(
            f"no known terms above threshold {format_trop(self.tau)}")

    def coefficient(self, exponent) -> Fraction:
        exponent = Fraction(exponent)
        for e, c in self.terms:
            if e == exponent:
                return c
        return Fraction(0)

    # -- arithmetic -------------------------------------------------------------
    def __neg__(self):
        return PuiseuxSeries._raw(tuple((e, -c) for e, c in self.terms), self.tau)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        tau = _tmax(self.tau, other.tau)
        acc = dict(self.terms)
        for e, c in other.terms:
            acc[e] = acc.get(e, 0) + c
        keep = tau is NEG_INF
        terms = tuple(sorted(((e, c) for e, c in acc.items() if c and (keep or e >= tau)),
                             reverse=True))
        return PuiseuxSeries._raw(terms, tau)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return PuiseuxSeries.zero()
        tau = _tmax(_tadd(self.tau, other.top()), _tadd(other.tau, self.top()))
        acc = {}
        exact = tau is NEG_INF
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if not exact and e < tau:
                    break  # other.terms descend, so the rest are lower still
                acc[e] = acc.get(e, 0) + c1 * c2
        terms = tuple(sorted(((e, c) for e, c in acc.items() if c), reverse=True))
        return PuiseuxSeries._raw(terms, tau)

    __rmul__ = __mul__

    def inverse(self, depth=None) -> "PuiseuxSeries":
        """Multiplicative inverse, keeping exponents down to ``-valuation - depth``."""
        depth = DEFAULT_DEPTH if depth is None else Fraction(depth)
        if depth <= 0:
            raise ValueError("depth must be positive")
        if self.is_zero:
            raise DivisionByZeroSeries("inverse of the zero series")
        if not self.terms:
            raise IndeterminateLeadingTerm(
                f"all known terms cancelled above {format_trop(self.tau)}")
        nu, c = self.terms[0]
        tau = -nu - depth
        if self.tau is not NEG_INF:
            tau = max(tau, self.tau - 2 * nu)
        cutoff = tau + nu  # remainder exponents below this cannot reach the window
        rem = {Fraction(0): Fraction(1)}
        quotient = []
        dropped = False
        while rem:
            e = max(rem)
            qe = e - nu
            if qe < tau:
                break
            qc = rem.pop(e) / c
            quotient.append((qe, qc))
            for fe, fc in self.terms[1:]:
                k = qe + fe
                if k < cutoff:
                    dropped = True
                    break
                v = rem.get(k, 0) - qc * fc
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        if not rem and not dropped and self.tau is NEG_INF:
            tau = NEG_INF
        return PuiseuxSeries._raw(tuple(quotient), tau)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (self ** -k).inverse()
        result = PuiseuxSeries.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def truncate(self, depth) -> "PuiseuxSeries":
        """Drop terms more than ``depth`` below the leading exponent."""
        if not self.terms:
            return self
        cut = self.terms[0][0] - Fraction(depth)
        if self.terms[-1][0] >= cut:
            return self
        kept = tuple(t for t in self.terms if t[0] >= cut)
        return PuiseuxSeries._raw(kept, _tmax(self.tau, cut))

    # -- comparison / display -------------------------------------------------
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.terms == other.terms and self.tau == other.tau

    def __hash__(self):
        return hash((self.terms, self.tau))

    def agrees_with(self, other, above) -> bool:
        """True when both series have the same terms at exponents >= ``above``."""
        a = [t for t in self.terms if t[0] >= above]
        b = [t for t in _coerce(other).terms if t[0] >= above]
        return a == b

    def __repr__(self):
        return f"PuiseuxSeries({self})"

    def __str__(self):
        parts = [f"{c}*z^({e})" for e, c in self.terms]
        if self.tau is not NEG_INF:
            parts.append(f"O(z^({self.tau}))")
        if not parts:
            return "0"
        return "+".join(parts).replace("+-", "-")


def _coerce(x):
    if isinstance(x, PuiseuxSeries):
        return x
    if isinstance(x, (int, Fraction)):
        return PuiseuxSeries.const(x)
    return NotImplemented


# -- functional aliases --------------------------------------------------------

def ps_add(f, g):
    return f + g


def ps_neg(f):
    return -f


def ps_mul(f, g):
    return f * g


def ps_inv(f, depth=None):
    return f.inverse(depth)


def valuation(f) -> TropicalValue:
    return f.valuation()


def leading_coeff(f) -> Fraction:
    return f.leading_coeff()


# -- parsing -------------------------------------------------------------------

_TERM = re.compile(r"^(?P<c>\d+(?:/\d+)?)?(?:\*?z(?:\^\(?(?P<q>-?\d+(?:/\d+)?)\)?)?)?$")
_BIGO = re.compile(r"^O\(z\^\(?(?P<q>-?\d+(?:/\d+)?)\)?\)$")


def _split_terms(s: str):
    chunks, depth, start = [], 0, 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and s[i - 1] not in "*^":
            chunks.append(s[start:i])
            start = i
    chunks.append(s[start:])
    return [c for c in chunks if c not in ("", "+")]


def parse_series(text: str) -> PuiseuxSeries:
    """Parse the ``c*z^(q)+...`` rendering produced by ``str(series)``."""
    s = "".join(text.split())
    if s in ("0", "+0", "-0"):
        return PuiseuxSeries.zero()
    if not s:
        raise ValueError("empty series text")
    terms, tau = [], NEG_INF
    for chunk in _split_terms(s):
        sign = 1
        while chunk and chunk[0] in "+-":
            if chunk[0] == "-":
                sign = -sign
            chunk = chunk[1:]
        m = _BIGO.match(chunk)
        if m:
            tau = Fraction(m.group("q"))
            continue
        m = _TERM.match(chunk)
        if not m or not chunk:
            raise ValueError(f"cannot parse series term {chunk!r}")
        has_z = "z" in chunk
        c = Fraction(m.group("c")) if m.group("c") else Fraction(1)
        if not has_z and m.group("c") is None:
            raise ValueError(f"cannot parse series term {chunk!r}")
        q = Fraction(m.group("q")) if m.group("q") else Fraction(1 if has_z else 0)
        terms.append((q, sign * c))
    return PuiseuxSeries(terms, tau)


class PuiseuxField:
    """Field operations for evaluating rational expressions over series.

    Every intermediate result is truncated to a window of ``depth`` below its
    leading exponent so that iterated maps stay bounded in size.
    """

    def __init__(self, depth=None):
        self.depth = DEFAULT_DEPTH if depth is None else Fraction(depth)

    def lit(self, c):
        return PuiseuxSeries.const(c)

    def add(self, a, b):
        return (a + b).truncate(self.depth)

    def sub(self, a, b):
        return (a - b).truncate(self.depth)

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return (a * b).truncate(self.depth)

    def div(self, a, b):
        return (a * b.inverse(self.depth)).truncate(self.depth)
