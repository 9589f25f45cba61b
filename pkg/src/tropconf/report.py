"""Markdown and CSV rendering of analysis reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .discrete import DiscreteConfinementReport
from .maxplus import NEG_INF
from .mapdsl import tropical_name
from .tropcorr import CorrespondenceReport
from .ultra import UltraConfinementReport, format_nd

__all__ = ["OrbitReport", "RootCheckTable", "LimitCheckReport", "emit_table", "fmt_value", "CSV_HEADER"]

CSV_HEADER = ("step", "coordinate", "branch", "value", "flag")


@dataclass
class OrbitReport:
    state: tuple          # coordinate names as printed
    states: list


@dataclass
class RootCheckTable:
    state: tuple
    free: str
    rows: list            # (step, coordinate, (num, den), F, RootCheckReport)
    shift_form: bool = False

    @property
    def ok(self):
        return all(r[4].ok for r in self.rows)


@dataclass
class LimitCheckReport:
    expr: str
    eps: list
    deviations: list      # float or exception instance
    bound: float
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        finite = [d for d in self.deviations if isinstance(d, float)]
        return len(finite) == len(self.deviations) and all(d <= b for d, b in zip(finite, self.bounds))

    @property
    def bounds(self):
        return [e * self.bound for e in self.eps]


def fmt_value(x) -> str:
    if x is NEG_INF:
        return "-inf"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return str(x)


def _fmt_tuple(t):
    return "(" + ", ".join(fmt_value(v) for v in t) + ")"


def _set(xs):
    return format_nd(set(xs))


# -- row builders: each returns (md_header, md_rows, csv_rows, trailer) ------------

def _ultra(rep: UltraConfinementReport, shift_form: bool):
    csv_rows = []
    for n, recs in enumerate(rep.steps):
        for name, r in zip(rep.state, recs):
            flag = "" if r.differentiable else "ND"
            csv_rows.append((n, name, "0", fmt_value(r.value), flag))
            csv_rows.append((n, name, "+", str(r.right), flag))
            csv_rows.append((n, name, "-", str(r.left), flag))
    header = ["n", "delta=0", "delta>0", "delta<0", "ND"]
    md = []
    if shift_form:
        scalar = [rep.steps[0][0]] + [recs[1] for recs in rep.steps]
        for n, r in enumerate(scalar):
            md.append((n, fmt_value(r.value), str(r.right), str(r.left), "" if r.differentiable else "ND"))
    else:
        header = ["n", "coordinate"] + header[1:]
        for n, recs in enumerate(rep.steps):
            for name, r in zip(rep.state, recs):
                md.append((n, name, fmt_value(r.value), str(r.right), str(r.left),
                           "" if r.differentiable else "ND"))
    trailer = [f"verdict: {rep.verdict}"] + rep.footnotes
    return header, md, csv_rows, trailer


def _discrete(rep: DiscreteConfinementReport):
    csv_rows, md = [], []
    for rec in rep.steps:
        flags = []
        if rec.has_infinity:
            flags.append("infinite")
        if not rec.info_retained:
            flags.append("lost")
        flag = ";".join(flags)
        for s in rep.samples:
            for name, v in zip(rep.state, rec.limits[s]):
                csv_rows.append((rec.step, name, f"{rep.free}={fmt_value(s)}", fmt_value(v), flag))
        md.append((rec.step, *(_fmt_tuple(rec.limits[s]) for s in rep.samples), flag))
    coords = ", ".join(rep.state)
    header = ["n"] + [f"({coords}) at {rep.free}={fmt_value(s)}" for s in rep.samples] + ["flags"]
    coord, cand = rep.perturb
    if cand is math.inf:
        start = "1/eps"
    else:
        start = "eps" if cand == 0 else f"{fmt_value(cand)} + eps"
    trailer = [f"perturbation: {coord} = {start}",
               f"verdict: {rep.verdict}", rep.reason] + rep.footnotes
    return header, md, csv_rows, trailer


def _correspond(rep: CorrespondenceReport, shift_form: bool):
    names = [tropical_name(s) for s in rep.state]
    csv_rows, md = [], []
    for n, (vals, trop) in enumerate(zip(rep.valuations, rep.tropical)):
        for name, v, t in zip(names, vals, trop):
            flag = "" if v == t else "diverged"
            csv_rows.append((n, name, "valuation", fmt_value(v), flag))
            csv_rows.append((n, name, "tropical", fmt_value(t), flag))
    if shift_form:
        header = ["n", "valuation", "tropical", "flag"]
        for n, (v, t) in enumerate(zip(rep.scalar_valuations(), rep.scalar_tropical())):
            md.append((n, fmt_value(v), fmt_value(t), "" if v == t else "diverged"))
    else:
        header = ["n", "coordinate", "valuation", "tropical", "flag"]
        for val, trop in zip(csv_rows[::2], csv_rows[1::2]):
            md.append((val[0], val[1], val[3], trop[3], val[4]))
    if rep.first_divergence is None:
        verdict = "valuations equal the tropical orbit at every compared step"
    else:
        verdict = f"first divergence at step {rep.first_divergence[0]} ({rep.first_divergence[1]})"
        if rep.first_scalar_divergence is not None:
            verdict += f"; scalar sequence first diverges at n = {rep.first_scalar_divergence}"
    return header, md, csv_rows, [f"verdict: {verdict}"] + rep.notes


def _root_check(tab: RootCheckTable):
    csv_rows, md = [], []
    for n, name, (num, den), F, r in tab.rows:
        flag = "ok" if r.ok else "fail"
        if r.warnings:
            flag += ";shared-roots"
        tname = tropical_name(name)
        csv_rows.append((n, tname, "function", str(F), flag))
        csv_rows.append((n, tname, "numerator-roots", _set(r.num_roots), flag))
        csv_rows.append((n, tname, "denominator-roots", _set(r.den_roots), flag))
        csv_rows.append((n, tname, "nd", format_nd(r.nd), flag))
    free = tropical_name(tab.free)
    if tab.shift_form:
        by = {(n, name): (F, r) for n, name, _, F, r in tab.rows}
        scalar = [by[(0, tab.state[0])]] + [by[(n, tab.state[1])] for n in range(len({k[0] for k in by}))]
        header = ["n", f"value in {free}", "roots (numerator; denominator)", "ND", "check"]
        for n, (F, r) in enumerate(scalar):
            md.append((n, str(F), f"{_set(r.num_roots)}; {_set(r.den_roots)}", format_nd(r.nd),
                       "ok" if r.ok else "fail"))
    else:
        header = ["n", "coordinate", f"value in {free}", "roots (numerator; denominator)", "ND", "check"]
        for n, name, _, F, r in tab.rows:
            md.append((n, tropical_name(name), str(F), f"{_set(r.num_roots)}; {_set(r.den_roots)}",
                       format_nd(r.nd), "ok" if r.ok else "fail"))
    warnings = sorted({w for *_, r in tab.rows for w in r.warnings})
    return header, md, csv_rows, warnings


def _orbit(rep: OrbitReport):
    csv_rows, md = [], []
    for n, st in enumerate(rep.states):
        md.append((n, *(fmt_value(v) for v in st)))
        for name, v in zip(rep.state, st):
            csv_rows.append((n, name, "", fmt_value(v), ""))
    return ["n", *rep.state], md, csv_rows, []


def _limits(rep: LimitCheckReport):
    csv_rows, md = [], []
    for i, (e, d, b) in enumerate(zip(rep.eps, rep.deviations, rep.bounds)):
        if isinstance(d, float):
            val, flag = f"{d:.6g}", "" if d <= b else "exceeds-bound"
        else:
            val, flag = "nan", "overflow"
        csv_rows.append((i, "deviation", f"eps={e:.6g}", val, flag))
        md.append((f"{e:.6g}", val, f"{b:.6g}", flag or "ok"))
    return ["eps", "deviation", "eps*log(nodes)", "flag"], md, csv_rows, rep.notes


def _rows(report, shift_form):
    if isinstance(report, UltraConfinementReport):
        return _ultra(report, shift_form)
    if isinstance(report, DiscreteConfinementReport):
        return _discrete(report)
    if isinstance(report, CorrespondenceReport):
        return _correspond(report, shift_form)
    if isinstance(report, RootCheckTable):
        return _root_check(report)
    if isinstance(report, OrbitReport):
        return _orbit(report)
    if isinstance(report, LimitCheckReport):
        return _limits(report)
    raise TypeError(f"cannot render {type(report).__name__}")


def _md_table(header, rows):
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return out


def emit_table(report, format: str = "md", shift_form: bool = False) -> str:
    """Render ``report`` as a markdown table (``md``) or CSV (``csv``).

    ``shift_form`` selects the scalar one-row-per-n layout for confinement
    reports of maps whose first update copies the second coordinate.  An
    empty report (None or empty list) renders as the bare header.
    """
    if format not in ("md", "markdown", "csv"):
        raise ValueError(f"unknown format {format!r}")
    empty = report is None or (isinstance(report, (list, tuple)) and not report)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        if not empty:
            w.writerows(_rows(report, shift_form)[2])
        return buf.getvalue()
    if empty:
        return "\n".join(_md_table(CSV_HEADER, [])) + "\n"
    header, md, _, trailer = _rows(report, shift_form)
    lines = _md_table(header, md)
    if trailer:
        lines.append("")
        lines += [t for t in trailer if t]
    return "\n".join(lines) + "\n"
