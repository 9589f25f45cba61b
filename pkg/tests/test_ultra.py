from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropconf.builtins import resolve_map
from tropconf.errors import SignMismatch
from tropconf.maxplus import NEG_INF
from tropconf.ultra import (LargeJet, PiecewiseLinearFn, SignedJet, differentiability_report,
                            format_nd, is_shift_form, jet_max, jet_orbit, large_orbit, nd_points,
                            pl_orbit, scalar_view)

F = Fraction
PHI = resolve_map("ud-autonomous")[1]
vals = st.fractions(min_value=-6, max_value=6, max_denominator=4)


def _scalar(w0, sign, steps=5):
    return scalar_view(jet_orbit(PHI, {"X": w0, "Y": 0}, "Y", sign, steps))


def test_jet_max_examples():
    a, b = SignedJet(F(0), F(0), 1), SignedJet(F(0), F(1), 1)
    assert jet_max(a, b) == b
    a, b = SignedJet(F(0), F(0), -1), SignedJet(F(0), F(1), -1)
    assert jet_max(a, b) == a
    assert jet_max(SignedJet(F(3), F(-5)), SignedJet(F(1), F(100))) == SignedJet(F(3), F(-5))
    with pytest.raises(SignMismatch):
        jet_max(SignedJet(F(0), F(0), 1), SignedJet(F(0), F(0), -1))


def test_jet_orbit_at_three():
    plus = _scalar(F(3), +1)
    assert [(j.base, j.slope) for j in plus] == [
        (3, 0), (0, 1), (-3, 1), (0, -1), (3, -1), (3, 0), (0, 1)]
    minus = _scalar(F(3), -1)
    assert [(j.base, j.slope) for j in minus][3] == (0, -1)
    assert [str(j) for j in minus] == ["3", "d", "-3", "-d", "3 - d", "3", "d"]


def test_jet_at_negative_start():
    assert (_scalar(F(-2), +1)[3].base, _scalar(F(-2), +1)[3].slope) == (2, 0)


@given(vals.filter(bool), st.sampled_from([1, -1]))
def test_jets_match_exact_orbit_near_zero(w0, sign):
    # oracle: iterate the tropical map exactly at a small perturbation
    jets = _scalar(w0, sign)
    for d in (abs(w0) / 50, abs(w0) / 100):
        exact = scalar_view(PHI.orbit((w0, sign * d), 5))
        assert [j.at(sign * d) for j in jets] == exact


def test_differentiability_verdicts():
    rep = differentiability_report(PHI, {"X": 3, "Y": 0}, "Y", 8)
    assert (rep.first_nd_step, rep.confinement_step) == (1, 3)
    rep = differentiability_report(PHI, {"X": -2, "Y": 0}, "Y", 8)
    assert (rep.first_nd_step, rep.confinement_step) == (1, 4)
    assert rep.verdict == "confined at 4"


@given(vals)
def test_fifth_iterate_returns_the_start_flat(w0):
    for sign in (1, -1):
        j = _scalar(w0, sign)[5]
        assert (j.base, j.slope) == (w0, 0)


def test_large_orbit():
    got = scalar_view(large_orbit(PHI, {"X": F(7, 3)}, "Y", 5))
    assert [str(j) for j in got] == ["7/3", "-L", "-7/3", "L", "7/3 + L", "7/3", "-L"]
    got = scalar_view(large_orbit(PHI, {"X": F(-2)}, "Y", 5))
    assert got[3] == LargeJet(F(1), F(2)) and got[4] == LargeJet(F(1), F(0))


def test_pl_orbit_shapes():
    fns = scalar_view(pl_orbit(PHI, "Y", {"X": 2}, 5))
    assert fns[2].breaks == (0,) and fns[2].slopes == (0, 1)
    for w1 in (F(-5), F(0), F(1), F(3), F(9)):
        assert fns[2](w1) == max(0, w1) - 2
        assert fns[3](w1) == max(0, 2, w1) - 2 - w1
        assert fns[4](w1) == max(0, 2) - w1
    assert [format_nd(nd_points(f)) for f in fns] == [
        "{}", "{-inf}", "{0}", "{2, -inf}", "{-inf}", "{}", "{-inf}"]


pl_fns = st.builds(
    lambda pts, l, r: PiecewiseLinearFn.from_points(sorted(pts), [F(i) for i in range(len(pts))], l, r),
    st.sets(vals, min_size=1, max_size=4), vals, vals)
probes = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=7), min_size=1, max_size=8)


@given(pl_fns, pl_fns, probes)
def test_pl_operations_are_pointwise(f, g, xs):
    for x in xs:
        assert f.maximum(g)(x) == max(f(x), g(x))
        assert (f + g)(x) == f(x) + g(x)
        assert (f - g)(x) == f(x) - g(x)
        assert f.scale(3)(x) == 3 * f(x)


@given(pl_fns, pl_fns)
def test_maximum_is_canonical(f, g):
    h = f.maximum(g)
    assert all(a != b for a, b in zip(h.slopes, h.slopes[1:]))


def test_shift_form_detection():
    assert is_shift_form(PHI)
    assert is_shift_form(resolve_map("udp1-sigma2")[1])


def test_nd_of_bottom_is_empty():
    assert nd_points(NEG_INF) == set()
