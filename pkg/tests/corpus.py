"""Seeded generators shared by the property and acceptance tests."""

import random
from fractions import Fraction

from tropconf.mapdsl import Add, Div, Lit, Mul, Pow, Var

VARS = ("a", "b", "c", "d")


def random_sf_expr(rng: random.Random, depth: int, names=VARS, literals=(1,)):
    """Random subtraction-free expression tree of at most ``depth`` levels."""
    if depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.2:
            return Lit(Fraction(rng.choice(literals)))
        return Var(rng.choice(names))
    kind = rng.choice(("add", "add", "mul", "div", "pow"))
    if kind == "pow":
        return Pow(random_sf_expr(rng, depth - 1, names, literals), rng.choice((-2, -1, 2, 3)))
    cls = {"add": Add, "mul": Mul, "div": Div}[kind]
    return cls(random_sf_expr(rng, depth - 1, names, literals),
               random_sf_expr(rng, depth - 1, names, literals))


def random_rational(rng: random.Random, lo=-4, hi=4, dens=(1, 2, 3)):
    den = rng.choice(dens)
    return Fraction(rng.randint(lo * den, hi * den), den)


def expression_corpus(n=100, seed=20240601, depth=6, literals=(1,)):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        k = rng.randint(1, 4)
        names = VARS[:k]
        e = random_sf_expr(rng, depth, names, literals)
        X = {v: random_rational(rng) for v in VARS}
        out.append((e, X))
    return out
