"""Rational maps: a small text DSL, ultradiscretization and lifting.

A map file looks like::

    vars: x, y, t
    params: a -> A, q -> Q
    x' = y
    y' = (a*t*y + 1)/(x*y^2)
    t' = q*t

Rational expressions are :class:`Expr` trees.  :func:`ultradiscretize`
replaces ``+ * /`` by ``max + -`` and yields a :class:`TropicalMap`;
:func:`lift` turns a map into one over Puiseux series, where the valuation
recovers the tropical orbit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import maxplus as mp
from .errors import (DSLSyntaxError, NonIntegerExponent, NotSubtractionFree,
                     OverflowAtEpsilon, UnboundVariable, UndeclaredName, ZeroAssignment)
from .maxplus import NEG_INF, TropExpr
from .puiseux import PuiseuxField, PuiseuxSeries, parse_series

__all__ = [
    "Expr", "Lit", "Var", "Param", "Add", "Sub", "Mul", "Div", "Neg", "Pow",
    "RationalMap", "TropicalMap", "LiftedMap",
    "parse_expr", "parse_map", "format_expr", "is_subtraction_free",
    "ultradiscretize", "ultradiscretize_expr", "tropical_name", "substitute",
    "NumberField", "eval_expr", "lift", "numeric_ud_check", "node_count",
]

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


# -- expression nodes --------------------------------------------------------

class Expr:
    __slots__ = ()

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True)
class Lit(Expr):
    value: Fraction


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int


_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def format_expr(e: Expr) -> str:
    """Render ``e`` so that :func:`parse_expr` rebuilds the same tree."""
    if isinstance(e, Lit):
        return str(e.value) if e.value >= 0 else f"(-{-e.value})"
    if isinstance(e, (Var, Param)):
        return e.name
    if isinstance(e, Neg):
        return "-" + _atom(e.arg)
    if isinstance(e, Pow):
        return f"{_atom(e.base)}^{e.exp}" if e.exp >= 0 else f"{_atom(e.base)}^({e.exp})"
    op = _BINARY[type(e)]
    prec = _PREC[type(e)]
    left = format_expr(e.left)
    if _prec(e.left) < prec:
        left = f"({left})"
    right = format_expr(e.right)
    if _prec(e.right) <= prec:
        right = f"({right})"
    elif op == "/" and left[-1].isdigit() and right[0].isdigit():
        right = f"({right})"  # keep "1/(2)" from re-reading as the literal 1/2
    if op in "+-":
        return f"{left} {op} {right}"
    return f"{left}{op}{right}"


def _prec(e: Expr) -> int:
    # a non-integer literal prints as p/q and binds like a quotient
    if isinstance(e, Lit) and e.value.denominator != 1:
        return _PREC[Div]
    return _PREC.get(type(e), 4)


def _atom(e: Expr) -> str:
    s = format_expr(e)
    if isinstance(e, (Var, Param)) or (isinstance(e, Lit) and e.value >= 0 and e.value.denominator == 1):
        return s
    return f"({s})"


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str, line: int):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.end() == pos:
            break
        col = m.start(m.lastindex) + 1
        if m.group(1) is not None:
            toks.append(("num", m.group(1), col))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), col))
        else:
            ch = m.group(3)
            if ch.isspace():
                pos = m.end()
                continue
            if ch not in "+-*/^()":
                raise DSLSyntaxError(f"unexpected character {ch!r}", line, col)
            toks.append(("op", ch, col))
        pos = m.end()
    toks.append(("end", "", n + 1))
    return toks


class _Parser:
    def __init__(self, text, line, state, params):
        self.toks = _tokenize(text, line)
        self.i = 0
        self.line = line
        self.state = state
        self.params = params

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None, cls=DSLSyntaxError):
        tok = tok or self.peek()
        return cls(msg, self.line, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] not in ("op",):
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return Pow(base, self.integer())
        return base

    def integer(self):
        paren = False
        if self.peek()[:2] == ("op", "("):
            self.take()
            paren = True
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        tok = self.take()
        if tok[0] != "num":
            raise self.error("exponent must be an integer", tok, NonIntegerExponent)
        if paren and self.peek()[:2] == ("op", "/"):
            raise self.error("exponent must be an integer", tok, NonIntegerExponent)
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            if self.peek()[:2] == ("op", "/") and self.toks[self.i + 1][0] == "num":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    raise self.error("zero denominator in rational literal", tok)
                return Lit(Fraction(int(val), den))
            return Lit(Fraction(int(val)))
        if kind == "name":
            if val in self.state:
                return Var(val)
            if val in self.params:
                return Param(val)
            raise UndeclaredName(f"line {self.line}, column {tok[2]}: undeclared name {val!r}")
        if (kind, val) == ("op", "("):
            e = self.expr()
            self.expect(")")
            return e
        if (kind, val) == ("op", "-"):
            return Neg(self.atom())
        raise self.error(f"unexpected {val or 'end of input'!r}", tok)


def parse_expr(text: str, state: Sequence[str] = (), params: Sequence[str] = (), line: int = 1) -> Expr:
    """Parse one rational expression over the given state and parameter names."""
    return _Parser(text, line, set(state), set(params)).parse()


# -- maps --------------------------------------------------------------------

def tropical_name(name: str) -> str:
    """Name of the tropical variable attached to a state variable (x -> X)."""
    return name[0].upper() + name[1:]


@dataclass(frozen=True)
class RationalMap:
    state: tuple
    params: tuple  # ((name, alias), ...)
    updates: tuple

    def __post_init__(self):
        if len(self.updates) != len(self.state):
            raise ValueError("one update per state variable is required")
        names = set(self.state)
        pnames = {p for p, _ in self.params}
        if len(names) != len(self.state) or len(pnames) != len(self.params):
            raise ValueError("duplicate declaration")
        if names & pnames:
            raise ValueError("state and parameter names must be disjoint")
        for e in self.updates:
            for kind, n in _names(e):
                if (kind == "var" and n not in names) or (kind == "param" and n not in pnames):
                    raise UndeclaredName(f"undeclared name {n!r}")

    @property
    def param_names(self):
        return tuple(p for p, _ in self.params)

    @property
    def aliases(self):
        return dict(self.params)

    def to_text(self) -> str:
        lines = ["vars: " + ", ".join(self.state)]
        if self.params:
            lines.append("params: " + ", ".join(f"{p} -> {a}" for p, a in self.params))
        lines += [f"{v}' = {format_expr(e)}" for v, e in zip(self.state, self.updates)]
        return "\n".join(lines) + "\n"

    def step(self, values: Sequence, params: Mapping = None, field=None):
        """Apply the map once; ``values`` ordered like ``state``."""
        field = field or NumberField()
        env = dict(zip(self.state, values))
        return tuple(eval_expr(e, env, params or {}, field) for e in self.updates)

    def orbit(self, init, n, params=None, field=None):
        states = [tuple(init)]
        for _ in range(n):
            states.append(self.step(states[-1], params, field))
        return states


def _names(e):
    if isinstance(e, Var):
        yield ("var", e.name)
    elif isinstance(e, Param):
        yield ("param", e.name)
    elif isinstance(e, (Add, Sub, Mul, Div)):
        yield from _names(e.left)
        yield from _names(e.right)
    elif isinstance(e, Neg):
        yield from _names(e.arg)
    elif isinstance(e, Pow):
        yield from _names(e.base)


def _split_list(body):
    return [s.strip() for s in body.split(",") if s.strip()]


def parse_map(text: str) -> RationalMap:
    """Parse a map file; see the module docstring for the format."""
    state, params, updates = None, [], {}
    pending = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            state = _split_list(line[5:])
            for n in state:
                if not _NAME.match(n):
                    raise DSLSyntaxError(f"bad variable name {n!r}", lineno, 1)
            continue
        if line.startswith("params:"):
            for item in _split_list(line[7:]):
                if "->" not in item:
                    raise DSLSyntaxError(f"parameter {item!r} needs an alias: name -> ALIAS", lineno, 1)
                p, a = (s.strip() for s in item.split("->", 1))
                if not (_NAME.match(p) and _NAME.match(a)):
                    raise DSLSyntaxError(f"bad parameter declaration {item!r}", lineno, 1)
                params.append((p, a))
            continue
        m = re.match(r"([A-Za-z][A-Za-z0-9_]*)\s*'\s*=(.*)\Z", line)
        if not m:
            raise DSLSyntaxError(f"expected \"name' = expr\", got {line!r}", lineno, 1)
        offset = raw.index("=") + 1
        pending.append((m.group(1), m.group(2), lineno, offset))

    if state is None:
        state = [name for name, *_ in pending]
    pnames = [p for p, _ in params]
    for name, body, lineno, offset in pending:
        try:
            expr = parse_expr(body, state, pnames, lineno)
        except DSLSyntaxError as exc:
            raise type(exc)(str(exc).split(": ", 1)[1], lineno, exc.column + offset) from None
        if name not in state:
            raise UndeclaredName(f"line {lineno}: update for undeclared variable {name!r}")
        if name in updates:
            raise DSLSyntaxError(f"second update for {name!r}", lineno, 1)
        updates[name] = expr
    missing = [v for v in state if v not in updates]
    if missing:
        raise DSLSyntaxError(f"no update for {', '.join(missing)}", 0, 0)
    return RationalMap(tuple(state), tuple(params), tuple(updates[v] for v in state))


# -- subtraction-freeness and ultradiscretization ----------------------------

def _offending(e: Expr):
    if isinstance(e, (Sub, Neg)):
        return e
    if isinstance(e, Lit):
        return e if e.value <= 0 else None
    if isinstance(e, (Add, Mul, Div)):
        return _offending(e.left) or _offending(e.right)
    if isinstance(e, Pow):
        return _offending(e.base)
    return None


def is_subtraction_free(e: Expr) -> bool:
    return _offending(e) is None


def ultradiscretize_expr(e: Expr, rename: Mapping[str, str]) -> TropExpr:
    """Operator replacement: + -> max, * -> +, / -> -, ^k -> k*."""
    bad = _offending(e)
    if bad is not None:
        raise NotSubtractionFree(f"not subtraction-free at {format_expr(bad)!r}")
    return _ud(e, rename)


def _collect(e, cls):
    if isinstance(e, cls):
        return _collect(e.left, cls) + _collect(e.right, cls)
    return [e]


def _ud(e, rename):
    if isinstance(e, Lit):
        return mp.Lit(Fraction(0))
    if isinstance(e, (Var, Param)):
        return mp.Var(rename[e.name])
    if isinstance(e, Add):
        return mp.Max(tuple(_ud(a, rename) for a in _collect(e, Add)))
    if isinstance(e, Mul):
        return mp.Plus(tuple(_ud(a, rename) for a in _collect(e, Mul)))
    if isinstance(e, Div):
        return mp.Minus(_ud(e.left, rename), _ud(e.right, rename))
    if isinstance(e, Pow):
        base = _ud(e.base, rename)
        return base if e.exp == 1 else mp.IntScale(e.exp, base)
    raise TypeError(f"unexpected node {e!r}")


@dataclass(frozen=True)
class TropicalMap:
    state: tuple
    params: tuple  # tropical parameter names
    updates: tuple

    def __post_init__(self):
        declared = set(self.state) | set(self.params)
        if len(declared) != len(self.state) + len(self.params):
            raise ValueError("tropical state and parameter names must be distinct")
        for e in self.updates:
            extra = mp.free_names(e) - declared
            if extra:
                raise UndeclaredName(f"undeclared tropical name(s) {sorted(extra)}")

    def to_text(self) -> str:
        return "".join(f"{v}' = {e}\n" for v, e in zip(self.state, self.updates))

    def step(self, values: Sequence, params: Mapping = None, algebra=mp.TROPICAL):
        env = dict(params or {})
        env.update(zip(self.state, values))
        return tuple(mp.evaluate(e, env, algebra) for e in self.updates)

    def orbit(self, init, n, params=None, algebra=mp.TROPICAL):
        states = [tuple(init)]
        for _ in range(n):
            states.append(self.step(states[-1], params, algebra))
        return states

    def index(self, name) -> int:
        try:
            return self.state.index(name)
        except ValueError:
            raise UnboundVariable(name) from None


def ultradiscretize(m: RationalMap) -> TropicalMap:
    rename = {v: tropical_name(v) for v in m.state}
    rename.update(m.params)
    targets = list(rename.values())
    if len(set(targets)) != len(targets):
        raise ValueError(f"tropical names collide: {targets}")
    updates = []
    for v, e in zip(m.state, m.updates):
        bad = _offending(e)
        if bad is not None:
            raise NotSubtractionFree(f"update {v}' is not subtraction-free at {format_expr(bad)!r}")
        updates.append(_ud(e, rename))
    return TropicalMap(tuple(rename[v] for v in m.state), tuple(a for _, a in m.params), tuple(updates))


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace state variables in ``e`` by expressions."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, (Lit, Param)):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exp)
    return type(e)(substitute(e.left, mapping), substitute(e.right, mapping))


def node_count(e: Expr) -> int:
    """Size of ``e`` with every power x^k written out as |k| copies of x."""
    if isinstance(e, (Lit, Var, Param)):
        return 1
    if isinstance(e, Neg):
        return 1 + node_count(e.arg)
    if isinstance(e, Pow):
        k = abs(e.exp)
        return max(1, k * node_count(e.base) + (k - 1))
    return 1 + node_count(e.left) + node_count(e.right)


# -- evaluation over fields --------------------------------------------------

class NumberField:
    """Plain Python arithmetic (Fraction, float, EpsRat, ...)."""

    def lit(self, c):
        return c

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return a / b


def eval_expr(e: Expr, env: Mapping, params: Mapping, field=None):
    field = field or NumberField()
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Param):
        try:
            return params[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Lit):
        return field.lit(e.value)
    if isinstance(e, Add):
        return field.add(eval_expr(e.left, env, params, field), eval_expr(e.right, env, params, field))
    if isinstance(e, Sub):
        return field.sub(eval_expr(e.left, env, params, field), eval_expr(e.right, env, params, field))
    if isinstance(e, Mul):
        return field.mul(eval_expr(e.left, env, params, field), eval_expr(e.right, env, params, field))
    if isinstance(e, Div):
        return field.div(eval_expr(e.left, env, params, field), eval_expr(e.right, env, params, field))
    if isinstance(e, Neg):
        return field.neg(eval_expr(e.arg, env, params, field))
    if isinstance(e, Pow):
        base = eval_expr(e.base, env, params, field)
        k = abs(e.exp)
        acc = None
        while k:
            if k & 1:
                acc = base if acc is None else field.mul(acc, base)
            k >>= 1
            if k:
                base = field.mul(base, base)
        if acc is None:
            acc = field.lit(Fraction(1))
        return field.div(field.lit(Fraction(1)), acc) if e.exp < 0 else acc
    raise TypeError(f"unexpected node {e!r}")


# -- lifting to Puiseux series -----------------------------------------------

def _as_series(value, what):
    if isinstance(value, PuiseuxSeries):
        return value
    if isinstance(value, str):
        return parse_series(value)
    coeff, exponent = value
    if exponent is NEG_INF:
        return PuiseuxSeries.zero()
    if Fraction(coeff) == 0:
        raise ZeroAssignment(f"{what}: coefficient 0 (pass PuiseuxSeries.zero() for the zero series)")
    return PuiseuxSeries.monomial(coeff, exponent)


@dataclass(frozen=True)
class LiftedMap:
    """A rational map evaluated coordinate-wise over truncated Puiseux series."""

    map: RationalMap
    params: dict
    depth: Fraction = field(default=Fraction(64))

    def step(self, values):
        return self.map.step(values, self.params, PuiseuxField(self.depth))

    def orbit(self, init, n):
        return self.map.orbit(init, n, self.params, PuiseuxField(self.depth))


def lift(m: RationalMap, init: Mapping, params: Mapping = None, depth=64):
    """Lift ``m`` and its data to Puiseux series.

    ``init`` maps each state variable to a series, a series string, or a
    signed monomial ``(coefficient, exponent)``.  ``params`` maps a parameter
    (by name or by tropical alias) to its tropical value P, lifted as z^P, or
    directly to a series.  Returns ``(initial_state, LiftedMap)``.
    """
    params = dict(params or {})
    lifted_params = {}
    for p, alias in m.params:
        if p in params:
            raw = params[p]
        elif alias in params:
            raw = params[alias]
        else:
            raise UnboundVariable(p)
        if isinstance(raw, (PuiseuxSeries, str, tuple)):
            lifted_params[p] = _as_series(raw, p)
        else:
            lifted_params[p] = _as_series((1, mp.as_trop(raw)), p)
    state = []
    for v in m.state:
        key = v if v in init else tropical_name(v)
        if key not in init:
            raise UnboundVariable(v)
        state.append(_as_series(init[key], v))
    return tuple(state), LiftedMap(m, lifted_params, Fraction(depth))


# -- numerical check of the defining limit -----------------------------------

def _logsumexp_scaled(a, b, eps):
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + eps * math.log1p(math.exp((lo - hi) / eps))


def _scaled_log(e, X, eps):
    # returns eps*log f(exp(X/eps)) without forming the exponentials
    if isinstance(e, Var):
        return float(X[e.name])
    if isinstance(e, Param):
        return float(X[e.name])
    if isinstance(e, Lit):
        return eps * math.log(e.value)
    if isinstance(e, Add):
        return _logsumexp_scaled(_scaled_log(e.left, X, eps), _scaled_log(e.right, X, eps), eps)
    if isinstance(e, Mul):
        return _scaled_log(e.left, X, eps) + _scaled_log(e.right, X, eps)
    if isinstance(e, Div):
        return _scaled_log(e.left, X, eps) - _scaled_log(e.right, X, eps)
    if isinstance(e, Pow):
        return e.exp * _scaled_log(e.base, X, eps)
    raise TypeError(f"unexpected node {e!r}")


def _direct(e, X, eps):
    env = {}
    for k, v in X.items():
        try:
            env[k] = math.exp(float(v) / eps)
        except OverflowError:
            raise OverflowAtEpsilon(f"exp({v}/{eps}) is not representable") from None
    val = eval_expr(e, {k: env[k] for k in env}, env, _FloatField())
    if not math.isfinite(val) or val <= 0:
        raise OverflowAtEpsilon(f"f(exp(X/{eps})) = {val} is not representable")
    return eps * math.log(val)


class _FloatField(NumberField):
    def lit(self, c):
        return float(c)

    def mul(self, a, b):
        r = a * b
        if math.isinf(r):
            raise OverflowAtEpsilon("floating overflow")
        return r

    def div(self, a, b):
        if b == 0:
            raise OverflowAtEpsilon("floating underflow to zero")
        return a / b


def numeric_ud_check(e: Expr, X: Mapping, eps_list: Sequence, method: str = "log"):
    """Deviations |eps*log f(exp(X/eps)) - F(X)| for each eps.

    ``X`` assigns a rational to every name occurring in ``e`` (state and
    parameter names alike, by their rational-side names).  ``method="log"``
    evaluates eps*log f stably without forming exp(X/eps); ``"direct"``
    evaluates f in plain floats.  An eps at which the computation is not
    representable yields an :class:`OverflowAtEpsilon` entry instead of a
    float; the remaining eps are still evaluated.
    """
    eps_list = [float(x) for x in eps_list]
    if any(a <= b for a, b in zip(eps_list, eps_list[1:])) or any(x <= 0 for x in eps_list):
        raise ValueError("eps_list must be positive and strictly decreasing")
    names = {n for _, n in _names(e)}
    rename = {n: n for n in names}
    F = mp.eval_trop(ultradiscretize_expr(e, rename), {n: mp.as_trop(X[n]) for n in names})
    if F is NEG_INF:
        raise ValueError("ultradiscretization is -inf at this point")
    out = []
    for eps in eps_list:
        try:
            if method == "log":
                v = _scaled_log(e, X, eps)
                if not math.isfinite(v):
                    raise OverflowAtEpsilon(f"non-finite value at eps={eps}")
            else:
                v = _direct(e, X, eps)
            out.append(abs(v - float(F)))
        except OverflowAtEpsilon as exc:
            out.append(exc)
    return out
