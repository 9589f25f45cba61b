"""Command line front end and scenario runner."""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import maxplus as mp
from .builtins import builtin_names, resolve_map, validate_builtins
from .discrete import run_discrete_confinement
from .errors import IndeterminateOrbit, ScenarioError, TropconfError
from .mapdsl import Var, node_count, numeric_ud_check, parse_expr, tropical_name
from .puiseux import parse_series
from .report import RootCheckTable, LimitCheckReport, OrbitReport, emit_table
from .tropcorr import lemma3_orbit, orbit_compare
from .ultra import differentiability_report, is_shift_form

ANALYSES = ("orbit", "confine-discrete", "confine-ultra", "correspond", "lemma3", "check-limit")
_LIST_KEYS = ("init", "lift", "coeff", "param", "at")
_SCALAR_KEYS = ("map", "analysis", "perturb", "free", "samples", "steps", "depth", "format",
                "sigma", "expr", "eps", "method", "domain")
_DEFAULT_STEPS = {"orbit": 10, "confine-discrete": 8, "confine-ultra": 8, "correspond": 6,
                  "lemma3": 6}


@dataclass
class GridReport:
    label: str
    runs: list            # (grid value, report)


@dataclass
class Scenario:
    map: str = None
    analysis: str = None
    perturb: str = None
    free: str = None
    samples: str = None
    steps: int = None
    depth: Fraction = Fraction(16)
    format: str = "md"
    sigma: int = None
    expr: str = None
    eps: str = "0.1,0.01,0.001"
    method: str = "log"
    domain: str = None
    init: dict = field(default_factory=dict)
    lift: dict = field(default_factory=dict)
    coeff: dict = field(default_factory=dict)
    param: dict = field(default_factory=dict)
    at: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)   # bare keys such as A, Q, T0, W0
    base_dir: Path = None


def _pairs(text: str, key: str) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ScenarioError(f"{key}: expected name=value, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def parse_scenario(text: str, base_dir: Path = None) -> Scenario:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    s = Scenario(base_dir=base_dir)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        if key in _LIST_KEYS:
            getattr(s, key).update(_pairs(value, key))
        elif key in _SCALAR_KEYS:
            setattr(s, key, value)
        elif key.replace("_", "").isalnum():
            s.extra[key] = value
        else:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
    return _normalise(s)


def _normalise(s: Scenario) -> Scenario:
    try:
        if s.steps is not None:
            s.steps = int(s.steps)
        s.depth = Fraction(s.depth)
        if s.sigma is not None:
            s.sigma = int(s.sigma)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    if s.format == "markdown":
        s.format = "md"
    if s.format not in ("md", "csv"):
        raise ScenarioError(f"format must be md or csv, not {s.format!r}")
    if s.analysis not in ANALYSES:
        raise ScenarioError(f"analysis must be one of {', '.join(ANALYSES)}")
    if s.analysis != "check-limit" and not s.map:
        raise ScenarioError("scenario needs a map")
    if s.steps is not None and s.steps < 0:
        raise ScenarioError("steps must be non-negative")
    return s


# -- name resolution ---------------------------------------------------------------

def _coord(m, name: str) -> str:
    """Rational-side coordinate for ``name`` (x, X, or w0/W0 style scalar names)."""
    for v in m.state:
        if name in (v, tropical_name(v)):
            return v
    if len(m.state) >= 2 and m.updates[0] == Var(m.state[1]) and name.lower() in ("w0", "w1"):
        return m.state[int(name[1])]
    raise ScenarioError(f"unknown coordinate {name!r}; map has {', '.join(m.state)}")


def _param(m, name: str):
    for p, alias in m.params:
        if name in (p, alias):
            return p
    return None


def _split_extra(m, s: Scenario):
    """Sort bare keys into coordinate values (X0, T0, W0, ...) and parameters (A, Q)."""
    init, params = {}, {}
    for k, v in {**s.extra, **s.param}.items():
        p = _param(m, k)
        if p is not None:
            params[p] = v
            continue
        init[_initial_coord(m, k)] = v
    for k, v in s.init.items():
        init[_initial_coord(m, k)] = v
    return init, params


def _initial_coord(m, key: str) -> str:
    """Coordinate for an initial-value key; ``T0`` falls back to ``T``."""
    try:
        return _coord(m, key)
    except ScenarioError:
        if not (key.endswith("0") and len(key) > 1):
            raise
    try:
        return _coord(m, key[:-1])
    except ScenarioError:
        raise ScenarioError(f"unknown coordinate {key!r}; map has {', '.join(m.state)}") from None


def _rational(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"not a rational number: {text!r}") from None


def _trop(text):
    try:
        return mp.as_trop(str(text))
    except (ValueError, TypeError, ZeroDivisionError):
        raise ScenarioError(f"not a tropical value: {text!r}") from None


def _grid(text) -> list:
    return [_rational(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


def _free(m, s: Scenario):
    if not s.free:
        return None, []
    name, sep, grid = s.free.partition("=")
    values = _grid(grid) if sep else []
    if s.samples:
        values += _grid(s.samples)
    return _coord(m, name.strip()), values


# -- analyses ------------------------------------------------------------------------

def _steps(s: Scenario) -> int:
    return s.steps if s.steps is not None else _DEFAULT_STEPS[s.analysis]


def _run_orbit(s, m, phi):
    init, params = _split_extra(m, s)
    tropical = s.domain == "tropical" or (s.domain is None and s.map.startswith(("ud", "udp1")))
    if tropical:
        if phi is None:
            raise ScenarioError("map is not subtraction-free; no tropical orbit")
        vals = [_trop(init[v]) for v in _require(m, init)]
        pv = {alias: _trop(params[p]) for p, alias in m.params if _has(params, p)}
        states = phi.orbit(vals, _steps(s), pv)
        return OrbitReport(phi.state, states), 0
    vals = [_rational(init[v]) for v in _require(m, init)]
    pv = {p: _rational(params[p]) for p, _ in m.params if _has(params, p)}
    return OrbitReport(m.state, m.orbit(vals, _steps(s), pv)), 0


def _has(params, p):
    if p not in params:
        raise ScenarioError(f"missing parameter {p}")
    return True


def _require(m, init, skip=()):
    missing = [v for v in m.state if v not in init and v not in skip]
    if missing:
        raise ScenarioError(f"missing initial value for {', '.join(missing)}")
    return m.state


def _perturb(m, s):
    if not s.perturb or "@" not in s.perturb:
        raise ScenarioError("perturb must look like COORD@VALUE")
    name, value = s.perturb.split("@", 1)
    return _coord(m, name.strip()), value.strip()


def _run_discrete(s, m, phi):
    init, params = _split_extra(m, s)
    coord, value = _perturb(m, s)
    cand = math.inf if value.lower() in ("inf", "oo", "infinity") else _rational(value)
    free, samples = _free(m, s)
    if free is None:
        raise ScenarioError("confine-discrete needs free = COORD=GRID")
    samples = samples or [Fraction(2), Fraction(3)]
    fixed = {v: _rational(init[v]) for v in m.state if v not in (coord, free) and v in init}
    pv = {p: _rational(v) for p, v in params.items()}
    rep = run_discrete_confinement(m, (coord, cand), (free, samples), _steps(s), fixed, pv)
    return rep, 0 if rep.confined or rep.entry_step is None else 1


def _run_ultra(s, m, phi):
    if phi is None:
        raise ScenarioError("map is not subtraction-free; nothing to ultradiscretize")
    init, params = _split_extra(m, s)
    coord, value = _perturb(m, s)
    point = {tropical_name(v): _trop(x) for v, x in init.items()}
    point[tropical_name(coord)] = _trop(value)
    for p, alias in m.params:
        if _has(params, p):
            point[alias] = _trop(params[p])
    free, grid = _free(m, s)
    runs = []
    if free is None:
        runs.append((None, point))
    else:
        for g in grid:
            runs.append((g, {**point, tropical_name(free): g}))
    reports = []
    for g, pt in runs:
        missing = [v for v in phi.state if v not in pt]
        if missing:
            raise ScenarioError(f"missing initial value for {', '.join(missing)}")
        reports.append((g, differentiability_report(phi, pt, tropical_name(coord), _steps(s))))
    code = 0 if all(r.confined or r.first_nd_step is None for _, r in reports) else 1
    if free is None:
        return reports[0][1], code
    return GridReport(tropical_name(free), reports), code


def _lift_values(m, s, init):
    lifts = {}
    for k, v in s.lift.items():
        try:
            lifts[_coord(m, k)] = parse_series(v)
        except ValueError as exc:
            raise ScenarioError(f"lift {k}: {exc}") from None
    coeffs = {_coord(m, k): _rational(v) for k, v in s.coeff.items()}
    trop = {v: _trop(x) for v, x in init.items() if v not in lifts}
    return lifts, coeffs, trop


def _run_correspond(s, m, phi):
    init, params = _split_extra(m, s)
    lifts, coeffs, trop = _lift_values(m, s, init)
    _require(m, {**trop, **lifts})
    pv = {p: _trop(v) for p, v in params.items()}
    rep = orbit_compare(m, trop, _steps(s), coeffs=coeffs, params=pv, depth=s.depth, lifts=lifts)
    return rep, 0 if rep.all_equal else 1


def _run_lemma3(s, m, phi):
    init, params = _split_extra(m, s)
    free, _ = _free(m, s)
    if free is None:
        raise ScenarioError("lemma3 needs free = COORD")
    _require(m, init, skip=(free,))
    fixed = {v: _trop(x) for v, x in init.items() if v != free}
    coeffs = {_coord(m, k): _rational(v) for k, v in s.coeff.items()}
    pv = {p: _trop(v) for p, v in params.items()}
    rows = lemma3_orbit(m, free, fixed, _steps(s), pv, coeffs)
    tab = RootCheckTable(m.state, free, rows, is_shift_form(phi))
    return tab, 0 if tab.ok else 1


def _run_limit(s, m, phi):
    if not s.expr:
        raise ScenarioError("check-limit needs expr")
    X = {k: _rational(v) for k, v in s.at.items()}
    e = parse_expr(s.expr, state=tuple(X))
    eps = [float(x) for x in s.eps.split(",") if x.strip()]
    devs = numeric_ud_check(e, X, eps, s.method)
    rep = LimitCheckReport(s.expr, eps, devs, math.log(node_count(e)))
    return rep, 0 if rep.ok else 1


_DISPATCH = {"orbit": _run_orbit, "confine-discrete": _run_discrete, "confine-ultra": _run_ultra,
             "correspond": _run_correspond, "lemma3": _run_lemma3, "check-limit": _run_limit}


def _map_path(s: Scenario) -> str:
    src = s.map
    if s.base_dir is None or Path(src).is_absolute() or src in (*builtin_names(), "qp1", "udp1"):
        return src
    return str(s.base_dir / src)


def run_scenario(s: Scenario):
    """Run one scenario; returns ``(report, exit_code)``."""
    m = phi = None
    if s.map:
        m, phi = resolve_map(_map_path(s), s.sigma)
    return _DISPATCH[s.analysis](s, m, phi)


def render(s: Scenario, report) -> str:
    shift = False
    if s.map:
        _, phi = resolve_map(_map_path(s), s.sigma)
        shift = phi is not None and is_shift_form(phi)
    if isinstance(report, GridReport):
        return "\n".join(f"## {report.label} = {g}\n\n" + emit_table(r, s.format, shift)
                         for g, r in report.runs)
    return emit_table(report, s.format, shift)


def execute(s: Scenario):
    """Run and render a scenario; returns ``(stdout_text, stderr_text, exit_code)``."""
    try:
        report, code = run_scenario(s)
        return render(s, report), "", code
    except IndeterminateOrbit as exc:
        return "", f"error at step {exc.step}: {exc}\n", 2
    except (TropconfError, ValueError, KeyError, ArithmeticError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        return "", f"error: {type(exc).__name__}: {msg}\n", 2


def run_files(paths):
    """Run scenario files concurrently; results come back in the given order."""
    def one(path):
        p = Path(path)
        try:
            s = parse_scenario(p.read_text(encoding="utf-8"), p.parent)
        except (TropconfError, OSError) as exc:
            return "", f"{path}: error: {exc}\n", 2
        out, err, code = execute(s)
        return out, f"{path}: {err}" if err else "", code

    with ThreadPoolExecutor() as pool:
        return list(pool.map(one, paths))


# -- argparse --------------------------------------------------------------------------

def _add_common(p, analysis):
    p.add_argument("--map", required=analysis != "check-limit",
                   help=f"builtin ({', '.join(builtin_names())}) or map file")
    p.add_argument("--sigma", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--format", choices=("md", "csv", "markdown"), default="md")
    p.add_argument("--init", action="append", default=[], metavar="NAME=VALUE[,...]")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE[,...]")
    if analysis in ("confine-discrete", "confine-ultra"):
        p.add_argument("--perturb", required=True, metavar="COORD@VALUE")
    if analysis in ("confine-discrete", "confine-ultra", "lemma3"):
        p.add_argument("--free", required=analysis != "confine-ultra", metavar="COORD[=GRID]")
        p.add_argument("--samples", metavar="LIST")
    if analysis in ("correspond", "lemma3"):
        p.add_argument("--coeff", action="append", default=[], metavar="NAME=VALUE")
        p.add_argument("--depth", default="16")
    if analysis == "correspond":
        p.add_argument("--lift", action="append", default=[], metavar="NAME=SERIES")
    if analysis == "orbit":
        p.add_argument("--domain", choices=("rational", "tropical"))


def build_parser():
    ap = argparse.ArgumentParser(prog="tropconf",
                                 description="Ultradiscretization and singularity confinement analyses.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("parse", "trop"):
        p = sub.add_parser(name, help="print the map" + (" after ultradiscretization" if name == "trop" else ""))
        p.add_argument("map_source", nargs="?", metavar="MAP")
        p.add_argument("--map")
        p.add_argument("--sigma", type=int)
    helps = {
        "orbit": "iterate the map from exact initial values",
        "confine-discrete": "track an eps-perturbed singular orbit in the discrete map",
        "confine-ultra": "track a delta-perturbed orbit through the tropical map",
        "correspond": "compare Puiseux valuations of a lifted orbit with the tropical orbit",
        "lemma3": "compare tropical roots with non-differentiable points along the orbit",
    }
    for name in ANALYSES[:-1]:
        _add_common(sub.add_parser(name, help=helps.get(name)), name)
    p = sub.add_parser("check-limit", help="numerical check of the ultradiscrete limit")
    p.add_argument("--expr", required=True)
    p.add_argument("--at", action="append", default=[], metavar="NAME=VALUE[,...]")
    p.add_argument("--eps", default="0.1,0.01,0.001")
    p.add_argument("--method", choices=("log", "direct"), default="log")
    p.add_argument("--format", choices=("md", "csv", "markdown"), default="md")
    p = sub.add_parser("run", help="run scenario files")
    p.add_argument("files", nargs="+")
    return ap


def _scenario_from_args(args) -> Scenario:
    s = Scenario(analysis=args.command)
    for key in ("map", "sigma", "steps", "format", "perturb", "free", "samples", "depth", "domain",
                "expr", "eps", "method"):
        if getattr(args, key, None) is not None:
            setattr(s, key, getattr(args, key))
    for key in ("init", "param", "coeff", "lift", "at"):
        for item in getattr(args, key, []) or []:
            getattr(s, key).update(_pairs(item, key))
    return _normalise(s)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        validate_builtins()
        if args.command in ("parse", "trop"):
            src = args.map_source or args.map
            if not src:
                raise ScenarioError("no map given")
            m, phi = resolve_map(src, args.sigma)
            if args.command == "parse":
                sys.stdout.write(m.to_text())
            else:
                if phi is None:
                    raise ScenarioError("map is not subtraction-free")
                sys.stdout.write(phi.to_text())
            return 0
        if args.command == "run":
            results = run_files(args.files)
            multi = len(args.files) > 1
            for path, (out, err, _) in zip(args.files, results):
                if multi and out:
                    sys.stdout.write(f"# {path}\n\n")
                sys.stdout.write(out)
                if multi and out:
                    sys.stdout.write("\n")
                sys.stderr.write(err)
            return max(code for _, _, code in results)
        s = _scenario_from_args(args)
    except (TropconfError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    out, err, code = execute(s)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
