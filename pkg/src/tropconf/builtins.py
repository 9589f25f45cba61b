"""Builtin maps: the discrete and ultradiscrete first Painleve systems and
the autonomous period-5 example."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from .errors import ScenarioError
from .mapdsl import RationalMap, TropicalMap, is_subtraction_free, parse_map, ultradiscretize

AUTONOMOUS = """\
# w[n-1] * w[n+1] = w[n] + 1
vars: x, y
x' = y
y' = (y + 1)/x
"""

QP1 = """\
# w[n-1] * w[n]^{sigma} * w[n+1] = a*t[n]*w[n] + 1,  t[n+1] = q*t[n]
vars: x, y, t
params: a -> A, q -> Q
x' = y
y' = (a*t*y + 1)/(x*y^{sigma})
t' = q*t
"""

SIGMAS = (0, 1, 2)


def builtin_sources() -> dict:
    out = {"autonomous": AUTONOMOUS}
    for s in SIGMAS:
        out[f"qp1-sigma{s}"] = QP1.replace("{sigma}", str(s))
    return out


_TROPICAL = {"ud-autonomous": "autonomous", **{f"udp1-sigma{s}": f"qp1-sigma{s}" for s in SIGMAS}}


def builtin_names():
    return sorted(builtin_sources()) + sorted(_TROPICAL)


@lru_cache(maxsize=None)
def _load(name: str):
    src = builtin_sources()
    if name in src:
        m = parse_map(src[name])
        return m, ultradiscretize(m)
    if name in _TROPICAL:
        return _load(_TROPICAL[name])
    raise ScenarioError(f"unknown builtin map {name!r}; choose from {', '.join(builtin_names())}")


def resolve_map(source: str, sigma=None):
    """Return ``(rational_map, tropical_map)`` for a builtin name or a file path.

    ``sigma`` selects the exponent for ``qp1``/``udp1`` names given without
    a ``-sigmaK`` suffix.  The tropical map is None when the rational map is
    not subtraction-free.
    """
    name = source
    if name in ("qp1", "udp1"):
        if sigma is None:
            raise ScenarioError(f"{name} needs sigma (0, 1 or 2)")
        name = f"{name}-sigma{int(sigma)}"
    if name in builtin_sources() or name in _TROPICAL:
        return _load(name)
    path = Path(source)
    if not path.exists():
        raise ScenarioError(f"unknown map {source!r}: not a builtin and no such file")
    m = parse_map(path.read_text(encoding="utf-8"))
    trop = ultradiscretize(m) if all(is_subtraction_free(e) for e in m.updates) else None
    return m, trop


def validate_builtins():
    for name in builtin_names():
        m, t = _load(name)
        assert isinstance(m, RationalMap) and isinstance(t, TropicalMap)
