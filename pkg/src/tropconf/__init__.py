"""Exact ultradiscretization, Puiseux-series valuations and singularity confinement."""

from .maxplus import NEG_INF, eval_trop
from .mapdsl import RationalMap, TropicalMap, lift, numeric_ud_check, parse_expr, parse_map, ultradiscretize
from .puiseux import PuiseuxSeries, parse_series
from .discrete import EpsRat, run_discrete_confinement
from .ultra import differentiability_report, jet_orbit, large_orbit, nd_points, pl_orbit
from .tropcorr import lemma3_check, lemma3_orbit, newton_valuations, orbit_compare, trop_roots
from .report import emit_table

__all__ = [
    "NEG_INF", "eval_trop", "RationalMap", "TropicalMap", "lift", "numeric_ud_check", "parse_expr",
    "parse_map", "ultradiscretize", "PuiseuxSeries", "parse_series", "EpsRat",
    "run_discrete_confinement", "differentiability_report", "jet_orbit", "large_orbit", "nd_points",
    "pl_orbit", "lemma3_check", "lemma3_orbit", "newton_valuations", "orbit_compare", "trop_roots",
    "emit_table",
]
