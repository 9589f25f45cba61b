from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropconf import maxplus as mp
from tropconf.errors import DivisionByBottom, UnboundVariable
from tropconf.maxplus import NEG_INF, IntScale, Lit, Max, Minus, Plus, Var

rationals = st.fractions(max_denominator=12).filter(lambda q: abs(q) < 1000)
trop = st.one_of(st.just(NEG_INF), rationals)


@pytest.mark.parametrize("a,b,want", [
    (1, 2, 2), (Fraction(5, 3), NEG_INF, Fraction(5, 3)), (-2, -2, -2)])
def test_add(a, b, want):
    assert mp.trop_add(a, b) == want


@pytest.mark.parametrize("a,b,want", [
    (1, 2, 3), (NEG_INF, 7, NEG_INF), (Fraction(3, 2), Fraction(-3, 2), 0)])
def test_mul(a, b, want):
    assert mp.trop_mul(a, b) == want


def test_div():
    assert mp.trop_div(1, 2) == -1
    assert mp.trop_div(NEG_INF, 2) is NEG_INF
    with pytest.raises(DivisionByBottom):
        mp.trop_div(3, NEG_INF)


def test_scale_of_bottom():
    assert mp.trop_scale(3, NEG_INF) is NEG_INF
    assert mp.trop_scale(0, NEG_INF) == 0
    assert mp.trop_scale(-2, Fraction(3, 4)) == Fraction(-3, 2)


def test_values_parse_and_print():
    assert mp.as_trop("-inf") is NEG_INF
    assert mp.as_trop("7/3") == Fraction(7, 3)
    assert mp.format_trop(NEG_INF) == "-inf"
    with pytest.raises(TypeError):
        mp.as_trop(0.5)


def test_bottom_orders_below_everything():
    assert NEG_INF < Fraction(-10**9)
    assert max(NEG_INF, Fraction(-3)) == -3
    assert sorted([Fraction(1), NEG_INF, Fraction(-1)])[0] is NEG_INF


def test_eval_hand_checked():
    e = Minus(Minus(Max((Plus((Var("A"), Var("T"), Var("Y"))), Lit(0))), Var("X")),
              IntScale(0, Var("Y")))
    assert mp.eval_trop(e, dict(A=1, T=2, X=3, Y=4)) == 4
    assert mp.eval_trop(Max((Var("W"), Lit(0))), {"W": NEG_INF}) == 0
    with pytest.raises(UnboundVariable):
        mp.eval_trop(Minus(Max((Var("Y"), Lit(0))), Var("X")), {"Y": 1})


def test_printer():
    e = Minus(Max((Var("Y"), Lit(0))), Var("X"))
    assert str(e) == "max(Y, 0) - X"


@given(trop, trop, trop)
def test_semiring_laws(a, b, c):
    add, mul = mp.trop_add, mp.trop_mul
    assert add(a, b) == add(b, a)
    assert add(add(a, b), c) == add(a, add(b, c))
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
    assert add(a, a) == a
    assert add(a, NEG_INF) == a
    assert mul(a, 0) == a
    assert mul(a, NEG_INF) is NEG_INF


@given(trop, rationals)
def test_div_inverts_mul(a, b):
    assert mp.trop_div(mp.trop_mul(a, b), b) == a


@given(st.integers(0, 6), trop)
def test_scale_is_repeated_product(k, a):
    acc = Fraction(0)
    for _ in range(k):
        acc = mp.trop_mul(acc, a)
    assert mp.trop_scale(k, a) == acc
