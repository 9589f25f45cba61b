"""Lifted (Puiseux) dynamics versus tropical dynamics.

* :func:`orbit_compare` iterates a map over Puiseux series and its
  ultradiscretization over the max-plus semiring and records where the
  valuation of the lifted orbit stops matching the tropical orbit.
* :func:`trop_roots` / :func:`newton_valuations` compute tropical roots of
  a tropical polynomial (by scanning for ties) and root valuations of a
  polynomial with series coefficients (from its Newton polygon).
* :func:`lemma3_check` compares the non-differentiability points of an
  ultradiscretized rational function with the tropical roots of its
  numerator and denominator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import maxplus as mp
from .errors import DivisionByZeroSeries, IndeterminateValuation
from .mapdsl import RationalMap, Var, eval_expr, lift, tropical_name, ultradiscretize
from .maxplus import NEG_INF, format_trop
from .puiseux import PuiseuxSeries
from .ultra import nd_points, pl_orbit

__all__ = [
    "PuiseuxPoly", "TropicalPoly", "tropicalize_poly", "trop_roots", "newton_valuations",
    "CorrespondenceReport", "orbit_compare", "RootCheckReport", "lemma3_check",
    "lifted_rational_orbit", "poly_from_roots", "lemma3_orbit",
]

log = logging.getLogger(__name__)

WINDOW_EXHAUSTED = "window exhausted"


# -- polynomials -------------------------------------------------------------------

def _series(c):
    return c if isinstance(c, PuiseuxSeries) else PuiseuxSeries.const(c)


class PuiseuxPoly:
    """Univariate polynomial with :class:`PuiseuxSeries` coefficients, low degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        cs = [_series(c) for c in coeffs]
        while cs and cs[-1].is_zero:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls):
        return cls([PuiseuxSeries.zero(), PuiseuxSeries.one()])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    @property
    def is_exact(self):
        return all(c.is_exact for c in self.coeffs)

    def lc(self):
        return self.coeffs[-1]

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        z = PuiseuxSeries.zero()
        return PuiseuxPoly([(self.coeffs[i] if i < len(self.coeffs) else z)
                            + (other.coeffs[i] if i < len(other.coeffs) else z) for i in range(n)])

    def __neg__(self):
        return PuiseuxPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PuiseuxSeries):
            return PuiseuxPoly([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return PuiseuxPoly([])
        out = [PuiseuxSeries.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return PuiseuxPoly(out)

    def shift(self, k):
        return PuiseuxPoly([PuiseuxSeries.zero()] * k + list(self.coeffs))

    def low_degree(self) -> int:
        for i, c in enumerate(self.coeffs):
            if not c.is_zero:
                return i
        return 0

    def __eq__(self, other):
        return isinstance(other, PuiseuxPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"PuiseuxPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _pseudo_divide(a: PuiseuxPoly, b: PuiseuxPoly):
    """Return (q, t, r) with lc(b)^t * a = q*b + r and deg r < deg b."""
    lcb = b.lc()
    q, r, t = PuiseuxPoly([]), a, 0
    while not r.is_zero() and r.degree >= b.degree:
        k = r.degree - b.degree
        mono = PuiseuxPoly([PuiseuxSeries.zero()] * k + [r.lc()])
        q = q * lcb + mono
        r = r * lcb - mono * b
        t += 1
    return q, t, r


def _gcd(a: PuiseuxPoly, b: PuiseuxPoly) -> PuiseuxPoly:
    while not b.is_zero():
        a, b = b, _pseudo_divide(a, b)[2]
    return a


def _reduce(num: PuiseuxPoly, den: PuiseuxPoly):
    k = min(num.low_degree(), den.low_degree()) if not num.is_zero() else 0
    if k:
        num = PuiseuxPoly(num.coeffs[k:])
        den = PuiseuxPoly(den.coeffs[k:])
    if num.is_zero() or num.degree < 1 or den.degree < 1 or not (num.is_exact and den.is_exact):
        return num, den
    g = _gcd(num, den)
    if g.degree < 1:
        return num, den
    qn, tn, rn = _pseudo_divide(num, g)
    qd, td, rd = _pseudo_divide(den, g)
    if not (rn.is_zero() and rd.is_zero()):
        return num, den
    lc = g.lc()
    for _ in range(td - tn):
        qn = qn * lc
    for _ in range(tn - td):
        qd = qd * lc
    return qn, qd


class _RationalInX:
    """Field of (num, den) pairs of PuiseuxPoly used to lift an orbit symbolically."""

    def lit(self, c):
        return (PuiseuxPoly([c]), PuiseuxPoly([1]))

    def add(self, a, b):
        if a[1] == b[1]:
            return _reduce(a[0] + b[0], a[1])
        return _reduce(a[0] * b[1] + b[0] * a[1], a[1] * b[1])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return (-a[0], a[1])

    def mul(self, a, b):
        return _reduce(a[0] * b[0], a[1] * b[1])

    def div(self, a, b):
        if b[0].is_zero():
            raise DivisionByZeroSeries("division by a rational function that is identically zero")
        return _reduce(a[0] * b[1], a[1] * b[0])


def _promote(s: PuiseuxSeries):
    return (PuiseuxPoly([s]), PuiseuxPoly([1]))


def lifted_rational_orbit(m: RationalMap, free: str, lifts: Mapping, params: Mapping, steps: int):
    """Orbit of ``m`` with coordinate ``free`` kept as the polynomial variable x.

    ``lifts`` gives the series for every other state coordinate; each orbit
    entry is a tuple of ``(numerator, denominator)`` PuiseuxPoly pairs.
    """
    init_series, lifted = lift(m, {**{v: lifts[v] for v in lifts}, free: (1, 0)}, params)
    state = []
    for v, s in zip(m.state, init_series):
        state.append((PuiseuxPoly.x(), PuiseuxPoly([1])) if v == free else _promote(s))
    pparams = {p: _promote(s) for p, s in lifted.params.items()}
    field_ = _RationalInX()
    states = [tuple(state)]
    for _ in range(steps):
        env = dict(zip(m.state, states[-1]))
        states.append(tuple(eval_expr(e, env, pparams, field_) for e in m.updates))
    return states


# -- tropical polynomials and roots --------------------------------------------------

@dataclass(frozen=True)
class TropicalPoly:
    coeffs: tuple  # TropicalValue per degree, low degree first

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(mp.as_trop(c) for c in self.coeffs))
        if not self.coeffs or self.coeffs[-1] is NEG_INF:
            raise ValueError("top coefficient of a tropical polynomial must be finite")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, X):
        acc = NEG_INF
        for i, c in enumerate(self.coeffs):
            acc = mp.trop_add(acc, mp.trop_mul(c, mp.trop_scale(i, X)))
        return acc


def tropicalize_poly(p: PuiseuxPoly) -> TropicalPoly:
    vals = []
    for i, c in enumerate(p.coeffs):
        try:
            vals.append(c.valuation())
        except IndeterminateValuation as exc:
            raise IndeterminateValuation(f"coefficient of degree {i}: {exc}") from None
    return TropicalPoly(tuple(vals))


def trop_roots(P: TropicalPoly) -> list:
    """Tropical roots with multiplicity, ascending (-inf first).

    A finite root is a point where max_i(C_i + i*X) is attained at least
    twice; candidates are all pairwise intersections of the monomials.
    """
    if P.degree < 1:
        raise ValueError("tropical roots of a constant polynomial are undefined")
    finite = [(i, c) for i, c in enumerate(P.coeffs) if c is not NEG_INF]
    roots = [NEG_INF] * finite[0][0]
    candidates = set()
    for a in range(len(finite)):
        for b in range(a + 1, len(finite)):
            (i, ci), (j, cj) = finite[a], finite[b]
            candidates.add((ci - cj) / (j - i))
    for X in sorted(candidates):
        vals = [(c + i * X, i) for i, c in finite]
        top = max(v for v, _ in vals)
        hit = [i for v, i in vals if v == top]
        if len(hit) >= 2:
            roots += [X] * (max(hit) - min(hit))
    return roots


def _upper_hull(points):
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] unless it lies strictly above the chord hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def newton_valuations(p: PuiseuxPoly) -> list:
    """Valuations of the roots of ``p`` (with multiplicity) from its Newton polygon."""
    if p.degree < 1:
        raise ValueError("root valuations of a constant polynomial are undefined")
    pts = []
    for i, c in enumerate(p.coeffs):
        if c.is_zero:
            continue
        try:
            pts.append((i, c.valuation()))
        except IndeterminateValuation as exc:
            raise IndeterminateValuation(f"coefficient of degree {i}: {exc}") from None
    out = [NEG_INF] * pts[0][0]
    hull = _upper_hull(pts)
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        out += [-(v2 - v1) / (i2 - i1)] * (i2 - i1)
    return sorted(out)


def poly_from_roots(roots: Sequence) -> PuiseuxPoly:
    """prod (x - c*z^q) for roots given as ``(c, q)`` pairs (c = 0 gives the root 0)."""
    p = PuiseuxPoly([1])
    for c, q in roots:
        r = PuiseuxSeries.monomial(c, q) if c else PuiseuxSeries.zero()
        p = p * PuiseuxPoly([-r, PuiseuxSeries.one()])
    return p


# -- orbit comparison ------------------------------------------------------------

@dataclass
class CorrespondenceReport:
    state: tuple
    valuations: list = field(default_factory=list)   # per step: tuple of TropicalValue or WINDOW_EXHAUSTED
    tropical: list = field(default_factory=list)     # per step: tuple of TropicalValue
    lifted: list = field(default_factory=list)       # per step: tuple of PuiseuxSeries
    first_divergence: tuple = None                   # (step, coordinate)
    first_scalar_divergence: int = None
    lifted_stopped: int = None
    notes: list = field(default_factory=list)

    def equal(self, n):
        return tuple(v == t for v, t in zip(self.valuations[n], self.tropical[n]))

    @property
    def all_equal(self):
        return self.first_divergence is None

    def scalar_valuations(self):
        return [self.valuations[0][0]] + [v[1] for v in self.valuations]

    def scalar_tropical(self):
        return [self.tropical[0][0]] + [t[1] for t in self.tropical]


def _val(s):
    try:
        return s.valuation()
    except IndeterminateValuation:
        return WINDOW_EXHAUSTED


def orbit_compare(m: RationalMap, tropical_init: Mapping, steps: int, coeffs: Mapping = None,
                  params: Mapping = None, depth=64, lifts: Mapping = None) -> CorrespondenceReport:
    """Compare valuations of the lifted orbit with the ultradiscrete orbit.

    ``tropical_init`` gives each state coordinate's tropical value (by
    rational or tropical name); the lift is ``coeffs[v] * z^value`` (default
    coefficient 1; -inf lifts to the zero series).  ``lifts`` may instead
    give explicit series, whose valuations then seed the tropical orbit.
    ``params`` holds tropical parameter values by alias.
    """
    coeffs = dict(coeffs or {})
    lifts = dict(lifts or {})
    phi = ultradiscretize(m)
    init = {}
    trop0 = []
    for v in m.state:
        tv = tropical_name(v)
        if v in lifts or tv in lifts:
            s = lifts.get(v, lifts.get(tv))
            init[v] = s
            trop0.append(s.valuation())
            continue
        x = mp.as_trop(tropical_init[v] if v in tropical_init else tropical_init[tv])
        c = coeffs.get(v, coeffs.get(tv, 1))
        init[v] = PuiseuxSeries.zero() if x is NEG_INF else (c, x)
        trop0.append(x)
    params = {k: mp.as_trop(val) for k, val in (params or {}).items()}
    start, lifted = lift(m, init, params, depth)
    tparams = {alias: params[alias] if alias in params else params[p] for p, alias in m.params}

    rep = CorrespondenceReport(m.state)
    trop_states = phi.orbit(trop0, steps, tparams)
    states = [start]
    for n in range(1, steps + 1):
        try:
            states.append(lifted.step(states[-1]))
        except (DivisionByZeroSeries, IndeterminateValuation) as exc:
            rep.lifted_stopped = n
            rep.notes.append(f"lifted orbit undefined from step {n}: {exc}")
            break
    rep.lifted = states
    rep.tropical = trop_states[:len(states)]
    for n, st in enumerate(states):
        vals = tuple(_val(s) for s in st)
        rep.valuations.append(vals)
        if WINDOW_EXHAUSTED in vals:
            rep.notes.append(f"step {n}: series window exhausted; raise the depth")
        if rep.first_divergence is None:
            for name, v, t in zip(m.state, vals, rep.tropical[n]):
                if v != t:
                    rep.first_divergence = (n, name)
                    break
    if len(m.state) >= 2 and m.updates[0] == Var(m.state[1]):
        sv, st_ = rep.scalar_valuations(), rep.scalar_tropical()
        for n, (v, t) in enumerate(zip(sv, st_)):
            if v != t:
                rep.first_scalar_divergence = n
                break
    return rep


# -- roots versus non-differentiability ----------------------------------------

@dataclass
class RootCheckReport:
    num_roots: list
    den_roots: list
    num_newton: list
    den_newton: list
    nd: set
    expected_nd: set
    roots_agree: bool
    nd_ok: bool
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return self.roots_agree and self.nd_ok


def _roots_or_empty(p: PuiseuxPoly):
    if p.degree < 1:
        return [], []
    return trop_roots(tropicalize_poly(p)), newton_valuations(p)


def lemma3_check(num: PuiseuxPoly, den: PuiseuxPoly, F) -> RootCheckReport:
    """Check that ND points of ``F`` come from tropical roots of ``num`` and ``den``.

    ``F`` is the ultradiscretization of ``num/den`` as a function of the
    polynomial variable (a :class:`PiecewiseLinearFn`).  Constant numerators
    or denominators contribute no roots.
    """
    nr, nn = _roots_or_empty(num)
    dr, dn = _roots_or_empty(den)
    agree = nr == nn and dr == dn
    expected = set(nr) | set(dr)
    nd = nd_points(F)
    warnings = []
    shared = set(nr) & set(dr)
    if shared:
        warnings.append("numerator and denominator share tropical root(s) "
                        + ", ".join(format_trop(x) for x in sorted(shared))
                        + "; cancellation may erase ND points")
        nd_ok = nd <= expected
    else:
        nd_ok = nd == expected
    for w in warnings:
        log.warning(w)
    return RootCheckReport(nr, dr, nn, dn, nd, expected, agree, nd_ok, warnings)


def lemma3_orbit(m: RationalMap, free: str, tropical_fixed: Mapping, steps: int,
                 params: Mapping = None, coeffs: Mapping = None):
    """Run :func:`lemma3_check` on every coordinate of every orbit step.

    Returns a list of ``(step, coordinate, (num, den), F, RootCheckReport)``.
    """
    coeffs = dict(coeffs or {})
    params = {k: mp.as_trop(v) for k, v in (params or {}).items()}
    phi = ultradiscretize(m)
    lifts = {}
    fixed_t = {}
    for v in m.state:
        if v == free:
            continue
        tv = tropical_name(v)
        x = mp.as_trop(tropical_fixed[v] if v in tropical_fixed else tropical_fixed[tv])
        lifts[v] = PuiseuxSeries.zero() if x is NEG_INF else (coeffs.get(v, 1), x)
        fixed_t[tv] = x
    for p, alias in m.params:
        fixed_t[alias] = params[alias] if alias in params else params[p]
    rat = lifted_rational_orbit(m, free, lifts, params, steps)
    pls = pl_orbit(phi, tropical_name(free), fixed_t, steps)
    out = []
    for n in range(steps + 1):
        for k, v in enumerate(m.state):
            num, den = rat[n][k]
            F = pls[n][k]
            out.append((n, v, (num, den), F, lemma3_check(num, den, F)))
    return out

