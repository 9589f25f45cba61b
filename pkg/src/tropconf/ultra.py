"""Ultradiscrete singularity confinement.

Three exact calculi run a :class:`~tropconf.mapdsl.TropicalMap` through the
generic evaluator of :mod:`tropconf.maxplus`:

* :class:`SignedJet` -- value ``base + slope*delta`` for an infinitesimal
  delta of fixed sign; gives one-sided derivatives along an orbit.
* :class:`LargeJet` -- value ``base + coeff*L`` for ``L -> +inf``; probes a
  coordinate sent to -inf.
* :class:`PiecewiseLinearFn` -- the whole orbit as explicit piecewise-linear
  functions of one free coordinate.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import DivisionByBottom, SignMismatch, UnboundVariable
from .maxplus import NEG_INF, TropicalAlgebra, as_trop, trop_scale
from . import mapdsl as md
from . import maxplus as mp
from .mapdsl import TropicalMap

__all__ = [
    "SignedJet", "JetAlgebra", "jet_max", "jet_plus", "jet_minus", "jet_ops", "jet_orbit",
    "LargeJet", "LargeAlgebra", "large_orbit",
    "LARGE_BOTTOM", "PiecewiseLinearFn", "PLAlgebra", "pl_orbit", "nd_points", "format_nd",
    "CoordRecord", "UltraConfinementReport", "differentiability_report",
    "scalar_view", "is_shift_form",
]


# -- signed jets ------------------------------------------------------------------

@dataclass(frozen=True)
class SignedJet:
    base: object
    slope: Fraction = Fraction(0)
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.base is NEG_INF and self.slope != 0:
            object.__setattr__(self, "slope", Fraction(0))

    def at(self, delta):
        return NEG_INF if self.base is NEG_INF else self.base + self.slope * delta

    def __str__(self):
        return _affine_str(self.base, self.slope, "d")


def _affine_str(base, slope, sym):
    if base is NEG_INF:
        return "-inf"
    if slope == 0:
        return str(base)
    term = sym if slope == 1 else f"-{sym}" if slope == -1 else f"{slope}*{sym}"
    if base == 0:
        return term
    if term.startswith("-"):
        return f"{base} - {term[1:]}"
    return f"{base} + {term}"


def _check(a, b):
    if a.sign != b.sign:
        raise SignMismatch("jets carry different perturbation signs")


def jet_max(a: SignedJet, b: SignedJet) -> SignedJet:
    _check(a, b)
    if a.base is NEG_INF:
        return b
    if b.base is NEG_INF:
        return a
    if a.base != b.base:
        return a if a.base > b.base else b
    if a.sign > 0:
        return a if a.slope >= b.slope else b
    return a if a.slope <= b.slope else b


def jet_plus(a: SignedJet, b: SignedJet) -> SignedJet:
    _check(a, b)
    if a.base is NEG_INF or b.base is NEG_INF:
        return SignedJet(NEG_INF, Fraction(0), a.sign)
    return SignedJet(a.base + b.base, a.slope + b.slope, a.sign)


def jet_minus(a: SignedJet, b: SignedJet) -> SignedJet:
    _check(a, b)
    if b.base is NEG_INF:
        raise DivisionByBottom("jet subtraction of -inf")
    if a.base is NEG_INF:
        return a
    return SignedJet(a.base - b.base, a.slope - b.slope, a.sign)


def jet_ops(a: SignedJet, b: SignedJet, op: str) -> SignedJet:
    return {"max": jet_max, "plus": jet_plus, "minus": jet_minus}[op](a, b)


class JetAlgebra(TropicalAlgebra):
    def __init__(self, sign: int):
        self.sign = sign

    def lit(self, value):
        return SignedJet(value, Fraction(0), self.sign)

    def max(self, a, b):
        return jet_max(a, b)

    def plus(self, a, b):
        return jet_plus(a, b)

    def minus(self, a, b):
        return jet_minus(a, b)

    def scale(self, k, a):
        base = trop_scale(k, a.base)
        slope = Fraction(0) if a.base is NEG_INF else k * a.slope
        return SignedJet(base, slope, a.sign)


def _split_point(phi: TropicalMap, point: Mapping):
    state, params = [], {}
    for v in phi.state:
        if v not in point:
            raise UnboundVariable(v)
        state.append(as_trop(point[v]))
    for p in phi.params:
        if p not in point:
            raise UnboundVariable(p)
        params[p] = as_trop(point[p])
    return state, params


def jet_orbit(phi: TropicalMap, point: Mapping, coord: str, sign: int, steps: int):
    """Orbit of ``point`` with ``coord`` replaced by ``value + delta``.

    Returns ``steps + 1`` states, each a tuple of :class:`SignedJet`.
    """
    alg = JetAlgebra(sign)
    state, params = _split_point(phi, point)
    i = phi.index(coord)
    jets = [SignedJet(v, Fraction(1) if k == i else Fraction(0), sign) for k, v in enumerate(state)]
    if jets[i].base is NEG_INF:
        raise ValueError("cannot perturb a -inf coordinate by delta; use large_orbit")
    pj = {p: alg.lit(v) for p, v in params.items()}
    return phi.orbit(jets, steps, pj, alg)


# -- differentiability report -------------------------------------------------------

@dataclass
class CoordRecord:
    value: object
    left: SignedJet
    right: SignedJet

    @property
    def differentiable(self) -> bool:
        return self.left.base == self.right.base and self.left.slope == self.right.slope


@dataclass
class UltraConfinementReport:
    state: tuple
    point: dict
    coord: str
    steps: list = field(default_factory=list)  # per step: tuple of CoordRecord
    first_nd_step: int = None
    confinement_step: int = None
    footnotes: list = field(default_factory=list)

    @property
    def confined(self) -> bool:
        return self.first_nd_step is not None and self.confinement_step is not None

    def step_differentiable(self, n) -> bool:
        return all(r.differentiable for r in self.steps[n])

    @property
    def verdict(self) -> str:
        if self.first_nd_step is None:
            return "differentiable along the whole orbit"
        if self.confinement_step is None:
            return f"not confined within {len(self.steps) - 1}"
        return f"confined at {self.confinement_step}"


def differentiability_report(phi: TropicalMap, point: Mapping, coord: str, steps: int) -> UltraConfinementReport:
    right = jet_orbit(phi, point, coord, +1, steps)
    left = jet_orbit(phi, point, coord, -1, steps)
    rep = UltraConfinementReport(phi.state, dict(point), coord)
    for n in range(steps + 1):
        rep.steps.append(tuple(CoordRecord(r.base, l, r) for l, r in zip(left[n], right[n])))
    for n in range(steps + 1):
        ok = rep.step_differentiable(n)
        if rep.first_nd_step is None:
            if not ok:
                rep.first_nd_step = n
        elif ok:
            rep.confinement_step = n
            break
    for n, recs in enumerate(rep.steps):
        for name, r in zip(phi.state, recs):
            if not r.differentiable:
                rep.footnotes.append(
                    f"step {n}: {name} has one-sided slopes {r.left.slope} (left) and "
                    f"{r.right.slope} (right) in {coord}")
    return rep


# -- large-parameter jets ---------------------------------------------------------

@dataclass(frozen=True)
class LargeJet:
    """``base + coeff*L`` with L -> +inf; ``base = NEG_INF`` is the bottom."""

    coeff: Fraction
    base: object

    def __lt__(self, other):
        if self.base is NEG_INF:
            return other.base is not NEG_INF
        if other.base is NEG_INF:
            return False
        return (self.coeff, self.base) < (other.coeff, other.base)

    def __str__(self):
        if self.base is NEG_INF:
            return "-inf"
        return _affine_str(self.base, self.coeff, "L")


LARGE_BOTTOM = LargeJet(Fraction(0), NEG_INF)


class LargeAlgebra(TropicalAlgebra):
    def lit(self, value):
        return LARGE_BOTTOM if value is NEG_INF else LargeJet(Fraction(0), value)

    def max(self, a, b):
        return b if a < b else a

    def plus(self, a, b):
        if a.base is NEG_INF or b.base is NEG_INF:
            return LARGE_BOTTOM
        return LargeJet(a.coeff + b.coeff, a.base + b.base)

    def minus(self, a, b):
        if b.base is NEG_INF:
            raise DivisionByBottom("subtraction of -inf")
        if a.base is NEG_INF:
            return a
        return LargeJet(a.coeff - b.coeff, a.base - b.base)

    def scale(self, k, a):
        if a.base is NEG_INF:
            return self.lit(trop_scale(k, NEG_INF))
        return LargeJet(k * a.coeff, k * a.base)


def large_orbit(phi: TropicalMap, point: Mapping, coord: str, steps: int, base=0):
    """Orbit with ``coord`` set to ``base - L`` for L -> +inf."""
    alg = LargeAlgebra()
    pt = dict(point)
    pt.setdefault(coord, 0)
    state, params = _split_point(phi, pt)
    i = phi.index(coord)
    init = [LargeJet(Fraction(-1), Fraction(base)) if k == i else alg.lit(v) for k, v in enumerate(state)]
    return phi.orbit(init, steps, {p: alg.lit(v) for p, v in params.items()}, alg)


# -- piecewise-linear functions of one variable -----------------------------------

class PiecewiseLinearFn:
    """Continuous piecewise-linear function on the rationals.

    ``breaks`` ascend strictly, ``values[i]`` is the value at ``breaks[i]``
    and ``slopes`` has one more entry than ``breaks`` (leftmost piece first).
    Without breakpoints the function is affine, anchored at 0.
    """

    __slots__ = ("breaks", "values", "slopes", "anchor_value")

    def __init__(self, breaks, values, slopes, anchor_value=None):
        self.breaks = tuple(breaks)
        self.values = tuple(values)
        self.slopes = tuple(slopes)
        self.anchor_value = anchor_value
        if len(self.slopes) != len(self.breaks) + 1 or len(self.values) != len(self.breaks):
            raise ValueError("inconsistent piecewise-linear data")
        if not self.breaks and anchor_value is None:
            raise ValueError("affine function needs its value at 0")

    @classmethod
    def affine(cls, slope, intercept):
        return cls((), (), (Fraction(slope),), Fraction(intercept))

    @classmethod
    def const(cls, c):
        return cls.affine(0, c)

    @classmethod
    def identity(cls):
        return cls.affine(1, 0)

    @classmethod
    def from_points(cls, xs, ys, left_slope, right_slope):
        """Interpolate through ``(xs, ys)`` with the given end slopes; canonical form."""
        if not xs:
            raise ValueError("need at least one point")
        slopes = [Fraction(left_slope)]
        slopes += [(ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
        slopes.append(Fraction(right_slope))
        b, v, s = [], [], [slopes[0]]
        for i, x in enumerate(xs):
            if slopes[i + 1] != s[-1]:
                b.append(x)
                v.append(ys[i])
                s.append(slopes[i + 1])
        if not b:
            return cls.affine(s[0], ys[0] - s[0] * xs[0])
        return cls(b, v, s)

    @property
    def anchor(self):
        return self.breaks[0] if self.breaks else Fraction(0)

    def __call__(self, x):
        x = Fraction(x)
        if not self.breaks:
            return self.anchor_value + self.slopes[0] * x
        if x <= self.breaks[0]:
            return self.values[0] + self.slopes[0] * (x - self.breaks[0])
        i = bisect.bisect_right(self.breaks, x) - 1
        return self.values[i] + self.slopes[i + 1] * (x - self.breaks[i])

    def slope_left(self, x):
        i = bisect.bisect_left(self.breaks, Fraction(x))
        return self.slopes[i]

    def slope_right(self, x):
        i = bisect.bisect_right(self.breaks, Fraction(x))
        return self.slopes[i]

    def __add__(self, other):
        xs = sorted(set(self.breaks) | set(other.breaks))
        if not xs:
            return PiecewiseLinearFn.affine(self.slopes[0] + other.slopes[0],
                                            self.anchor_value + other.anchor_value)
        return PiecewiseLinearFn.from_points(xs, [self(x) + other(x) for x in xs],
                                             self.slopes[0] + other.slopes[0],
                                             self.slopes[-1] + other.slopes[-1])

    def scale(self, k):
        if not self.breaks:
            return PiecewiseLinearFn.affine(k * self.slopes[0], k * self.anchor_value)
        if k == 0:
            return PiecewiseLinearFn.const(0)
        return PiecewiseLinearFn(self.breaks, [k * v for v in self.values], [k * s for s in self.slopes])

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def _roots(self):
        """Zeros of the function where it changes sign or crosses transversally."""
        out = []
        edges = [None, *self.breaks, None]
        for i, s in enumerate(self.slopes):
            if s == 0:
                continue
            ref = self.breaks[i - 1] if i > 0 else (self.breaks[0] if self.breaks else Fraction(0))
            x = ref - self(ref) / s
            lo, hi = edges[i], edges[i + 1]
            if (lo is None or x >= lo) and (hi is None or x <= hi):
                out.append(x)
        return out

    def maximum(self, other):
        diff = self - other
        xs = sorted(set(self.breaks) | set(other.breaks) | set(diff._roots()))
        if not xs:
            return self if diff.anchor_value >= 0 else other
        ys = [max(self(x), other(x)) for x in xs]
        lo, hi = xs[0] - 1, xs[-1] + 1
        left = self.slopes[0] if self(lo) >= other(lo) else other.slopes[0]
        right = self.slopes[-1] if self(hi) >= other(hi) else other.slopes[-1]
        return PiecewiseLinearFn.from_points(xs, ys, left, right)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseLinearFn):
            return NotImplemented
        return (self.breaks, self.values, self.slopes, self.anchor_value) == \
               (other.breaks, other.values, other.slopes, other.anchor_value)

    def __hash__(self):
        return hash((self.breaks, self.values, self.slopes, self.anchor_value))

    def __repr__(self):
        return f"PiecewiseLinearFn({self})"

    def __str__(self):
        if not self.breaks:
            return f"affine(slope={self.slopes[0]}, f(0)={self.anchor_value})"
        pieces = ", ".join(f"f({b})={v}" for b, v in zip(self.breaks, self.values))
        return f"pl({pieces}; slopes={'/'.join(str(s) for s in self.slopes)})"


class PLAlgebra(TropicalAlgebra):
    """Max-plus operations on piecewise-linear functions (and the constant -inf)."""

    def lit(self, value):
        return NEG_INF if value is NEG_INF else PiecewiseLinearFn.const(value)

    def max(self, a, b):
        if a is NEG_INF:
            return b
        if b is NEG_INF:
            return a
        return a.maximum(b)

    def plus(self, a, b):
        if a is NEG_INF or b is NEG_INF:
            return NEG_INF
        return a + b

    def minus(self, a, b):
        if b is NEG_INF:
            raise DivisionByBottom("subtraction of a coordinate that is identically -inf")
        if a is NEG_INF:
            return NEG_INF
        return a - b

    def scale(self, k, a):
        if a is NEG_INF:
            return self.lit(trop_scale(k, NEG_INF))
        return a.scale(k)


def pl_orbit(phi: TropicalMap, free: str, fixed: Mapping, steps: int):
    """Each state coordinate along the orbit as a function of the free coordinate."""
    alg = PLAlgebra()
    pt = dict(fixed)
    pt[free] = 0
    state, params = _split_point(phi, pt)
    i = phi.index(free)
    init = [PiecewiseLinearFn.identity() if k == i else alg.lit(v) for k, v in enumerate(state)]
    return phi.orbit(init, steps, {p: alg.lit(v) for p, v in params.items()}, alg)


def nd_points(f) -> set:
    """Points of non-differentiability; -inf is included when the left slope is nonzero."""
    if f is NEG_INF:
        return set()
    out = set(f.breaks)
    if f.slopes[0] != 0:
        out.add(NEG_INF)
    return out


def format_nd(points) -> str:
    if not points:
        return "{}"
    finite = sorted(p for p in points if p is not NEG_INF)
    items = [str(p) for p in finite] + (["-inf"] if NEG_INF in points else [])
    return "{" + ", ".join(items) + "}"


# -- scalar (second-order) view --------------------------------------------------

def is_shift_form(phi) -> bool:
    """True when the first update simply copies the second coordinate (x' = y)."""
    if len(phi.state) < 2:
        return False
    first = phi.updates[0]
    if isinstance(first, (mp.Var, md.Var)):
        return first.name == phi.state[1]
    return False


def scalar_view(states):
    """Scalar sequence W_0, W_1, ... of a shift-form orbit: x_0 then y_n."""
    return [states[0][0]] + [s[1] for s in states]

