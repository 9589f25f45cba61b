"""Discrete singularity confinement over exact rational functions of eps.

One coordinate of the initial state is perturbed (``c + eps``, or ``1/eps``
for the point at infinity), a second coordinate is instantiated at several
generic rationals, and the map is iterated exactly over :class:`EpsRat`.
Each step records the projective limits as eps -> 0.  A step is singular
when some limit is infinite or when the limits no longer depend on the
free coordinate; the singularity is confined at the first later step whose
limits are finite and again distinguish the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DivisionByZeroFunction, IndeterminateOrbit, UnboundVariable, ZeroFunction
from .mapdsl import RationalMap

__all__ = [
    "EpsRat", "er_arith", "ord0", "limit0",
    "StepRecord", "DiscreteConfinementReport", "run_discrete_confinement",
    "singular_candidates",
]

INF = math.inf


# -- dense polynomials over Q, coefficients low -> high ----------------------

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _padd(p, q):
    n = max(len(p), len(q))
    return _trim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def _pneg(p):
    return tuple(-c for c in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _pdivmod(p, q):
    r = list(p)
    dq = len(q) - 1
    lc = q[-1]
    quo = [Fraction(0)] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        k = len(r) - 1 - dq
        c = r[-1] / lc
        quo[k] = c
        for j, b in enumerate(q):
            r[k + j] -= c * b
        r = list(_trim(r))
    return _trim(quo), tuple(r)


def _monic(p):
    lc = p[-1]
    return tuple(c / lc for c in p)


def _pgcd(p, q):
    while q:
        p, q = q, _pdivmod(p, q)[1]
    return _monic(p) if p else ()


def _pord(p):
    for i, c in enumerate(p):
        if c:
            return i
    raise ZeroFunction("order of the zero polynomial")


class EpsRat:
    """Exact rational function of eps in lowest terms, monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num=(), den=(Fraction(1),)):
        num = _trim(Fraction(c) for c in num)
        den = _trim(Fraction(c) for c in den)
        if not den:
            raise DivisionByZeroFunction("zero denominator")
        if not num:
            den = (Fraction(1),)
        else:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pdivmod(num, g)[0]
                den = _pdivmod(den, g)[0]
            lc = den[-1]
            num = tuple(c / lc for c in num)
            den = tuple(c / lc for c in den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c):
        return cls((Fraction(c),))

    @classmethod
    def eps(cls):
        return cls((0, 1))

    def is_zero(self):
        return not self.num

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return EpsRat(_padd(self.num, other.num), self.den)
        return EpsRat(_padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
                      _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return EpsRat._raw(_pneg(self.num), self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return EpsRat(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise DivisionByZeroFunction("division by the zero rational function")
        return EpsRat(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return EpsRat.const(1) / (self ** -k)
        result = EpsRat.const(1)
        for _ in range(k):
            result = result * self
        return result

    @classmethod
    def _raw(cls, num, den):
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def at(self, eps):
        """Value at a concrete eps (exact for Fractions, float otherwise)."""
        n = sum(c * eps ** i for i, c in enumerate(self.num))
        d = sum(c * eps ** i for i, c in enumerate(self.den))
        return n / d

    def __repr__(self):
        return f"EpsRat({self})"

    def __str__(self):
        n, d = _pstr(self.num), _pstr(self.den)
        return n if d == "1" else f"({n})/({d})"


def _pstr(p):
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if not c:
            continue
        mono = "" if i == 0 else ("eps" if i == 1 else f"eps^{i}")
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def _coerce(x):
    if isinstance(x, EpsRat):
        return x
    if isinstance(x, (int, Fraction)):
        return EpsRat.const(x)
    return NotImplemented


_OPS = {"add": lambda a, b: a + b, "sub": lambda a, b: a - b,
        "mul": lambda a, b: a * b, "div": lambda a, b: a / b}


def er_arith(f, g, op: str) -> EpsRat:
    return _OPS[op](_coerce(f), _coerce(g))


def ord0(f: EpsRat) -> int:
    """Order of vanishing at eps = 0 (negative for a pole)."""
    f = _coerce(f)
    if f.is_zero():
        raise ZeroFunction("ord0 of the zero function")
    return _pord(f.num) - _pord(f.den)


def limit0(f: EpsRat):
    """Projective limit as eps -> 0: a Fraction, or ``math.inf``."""
    f = _coerce(f)
    if f.is_zero():
        return Fraction(0)
    k = ord0(f)
    if k > 0:
        return Fraction(0)
    if k < 0:
        return INF
    return f.num[_pord(f.num)] / f.den[_pord(f.den)]


# -- confinement ---------------------------------------------------------------

@dataclass
class StepRecord:
    step: int
    limits: dict   # sample -> tuple of limits, one per state coordinate
    orders: dict   # sample -> tuple of ord0 values (None for the zero function)
    has_infinity: bool
    info_retained: bool

    @property
    def singular(self) -> bool:
        return self.has_infinity or not self.info_retained


@dataclass
class DiscreteConfinementReport:
    state: tuple
    perturb: tuple
    free: str
    samples: tuple
    steps: list = field(default_factory=list)
    orbits: dict = field(default_factory=dict)
    entry_step: int = None
    confinement_step: int = None
    reason: str = ""
    footnotes: list = field(default_factory=list)

    @property
    def confined(self) -> bool:
        return self.entry_step is not None and self.confinement_step is not None

    @property
    def verdict(self) -> str:
        if self.entry_step is None:
            return "no singularity within N"
        if self.confinement_step is None:
            return f"not confined within {len(self.steps) - 1}"
        return f"confined at {self.confinement_step}"


def _initial_value(candidate):
    eps = EpsRat.eps()
    if candidate is INF or candidate == "inf" or (isinstance(candidate, float) and math.isinf(candidate)):
        return EpsRat.const(1) / eps
    return eps + Fraction(candidate)


def run_discrete_confinement(m: RationalMap, perturb, free, steps: int,
                             fixed: Mapping = None, params: Mapping = None) -> DiscreteConfinementReport:
    """Iterate ``m`` from a perturbed singular point and decide confinement.

    ``perturb`` is ``(coordinate, candidate)`` with ``candidate`` a rational
    or ``math.inf``; ``free`` is ``(coordinate, samples)`` with at least two
    distinct generic rationals.  Other coordinates take values from
    ``fixed``; parameters from ``params`` (rational values, by name).
    """
    coord, candidate = perturb
    free_coord, samples = free
    samples = tuple(Fraction(s) for s in samples)
    if len(samples) < 2 or len(set(samples)) != len(samples):
        raise ValueError("need at least two distinct samples for the free coordinate")
    for c in (coord, free_coord):
        if c not in m.state:
            raise UnboundVariable(c)
    if coord == free_coord:
        raise ValueError("perturbed and free coordinates must differ")
    fixed = dict(fixed or {})
    pvals = {p: EpsRat.const(v) for p, v in (params or {}).items()}
    missing = [p for p in m.param_names if p not in pvals]
    if missing:
        raise UnboundVariable(missing[0])

    report = DiscreteConfinementReport(m.state, (coord, candidate), free_coord, samples)
    for s in samples:
        init = []
        for v in m.state:
            if v == coord:
                init.append(_initial_value(candidate))
            elif v == free_coord:
                init.append(EpsRat.const(s))
            elif v in fixed:
                init.append(EpsRat.const(fixed[v]))
            else:
                raise UnboundVariable(v)
        states = [tuple(init)]
        for n in range(1, steps + 1):
            try:
                states.append(m.step(states[-1], pvals))
            except DivisionByZeroFunction:
                raise IndeterminateOrbit(
                    f"a denominator vanishes identically along the orbit (sample {free_coord}={s})",
                    step=n) from None
        report.orbits[s] = states

    for n in range(steps + 1):
        limits, orders = {}, {}
        for s in samples:
            st = report.orbits[s][n]
            limits[s] = tuple(limit0(f) for f in st)
            orders[s] = tuple(None if f.is_zero() else ord0(f) for f in st)
        has_inf = any(x is INF for lim in limits.values() for x in lim)
        retained = len(set(limits.values())) > 1
        report.steps.append(StepRecord(n, limits, orders, has_inf, retained))

    for rec in report.steps:
        if report.entry_step is None:
            if rec.singular:
                report.entry_step = rec.step
        elif not rec.singular:
            report.confinement_step = rec.step
            break

    if report.entry_step is None:
        report.reason = "no step hit an infinite limit or lost the initial data"
    elif report.confinement_step is None:
        report.reason = (f"singular from step {report.entry_step}; the limits never again "
                         f"became finite and {free_coord}-dependent within {steps} steps")
    else:
        lost = [r.step for r in report.steps[report.entry_step:report.confinement_step]
                if not r.info_retained]
        report.reason = (f"singular from step {report.entry_step}; limits finite and "
                         f"{free_coord}-dependent again at step {report.confinement_step}")
        if lost:
            report.reason += f"; initial data lost at steps {lost}"
    report.footnotes.append("confinement is certified for the supplied candidate only, "
                            "not for every singularity of the map")
    return report


def singular_candidates(m: RationalMap, coord: str, grid: Sequence, free, fixed: Mapping = None,
                        params: Mapping = None, steps: int = 2):
    """Grid values of ``coord`` at which some denominator of the first iterates vanishes."""
    free_coord, samples = free
    fixed = dict(fixed or {})
    found = []
    for g in grid:
        g = Fraction(g)
        for s in samples:
            vals = tuple(g if v == coord else Fraction(s) if v == free_coord else Fraction(fixed[v])
                         for v in m.state)
            try:
                m.orbit(vals, steps, {p: Fraction(x) for p, x in (params or {}).items()})
            except ZeroDivisionError:
                found.append(g)
                break
    return found
