"""Random polynomials and the exact-algebra invariants shared by several test files."""
from __future__ import annotations

import random
from fractions import Fraction

import sympy

from canardkit.polycore import (
    MultiPoly,
    div_exact,
    divides,
    factor_list,
    format_poly,
    gcd_poly,
    parse_poly,
    resultant,
    squarefree_decomposition,
)

VARS = ("x", "y", "z")
SYMS = sympy.symbols(VARS)


def random_poly(rng: random.Random, max_deg: int = 3, max_terms: int = 4, nvars: int = 3) -> MultiPoly:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exp = [0, 0, 0]
        for _ in range(rng.randint(0, max_deg)):
            exp[rng.randrange(nvars)] += 1
        terms[tuple(exp)] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return MultiPoly(VARS, terms)


def nonzero_poly(rng: random.Random, **kw) -> MultiPoly:
    while True:
        p = random_poly(rng, **kw)
        if not p.is_zero:
            return p


def to_sympy(p: MultiPoly):
    return sympy.Poly(sympy.sympify(format_poly(p).replace("^", "**"), locals=dict(zip(VARS, SYMS))), *SYMS)


def same_up_to_unit(p: MultiPoly, q: MultiPoly) -> bool:
    if p.is_zero or q.is_zero:
        return p.is_zero and q.is_zero
    return p.monic() == q.monic()


def random_point(rng: random.Random) -> dict:
    return {v: Fraction(rng.randint(-7, 7), rng.randint(1, 5)) for v in VARS}


def check_case(rng: random.Random) -> list[str]:
    """One randomized case: run every invariant, return the names of those that failed."""
    a, b, c = (random_poly(rng) for _ in range(3))
    failures = []

    def expect(name, ok):
        if not ok:
            failures.append(name)

    expect("add commutes", a + b == b + a)
    expect("mul commutes", a * b == b * a)
    expect("add associates", (a + b) + c == a + (b + c))
    expect("mul associates", (a * b) * c == a * (b * c))
    expect("distributes", a * (b + c) == a * b + a * c)
    expect("additive inverse", (a - a).is_zero)
    for v in VARS:
        expect(f"product rule d/d{v}", (a * b).diff(v) == a.diff(v) * b + a * b.diff(v))
    pt = random_point(rng)
    expect("evaluation is a ring map", (a * b + c)(**pt) == a(**pt) * b(**pt) + c(**pt))
    expect("print/parse round trip", parse_poly(format_poly(a), VARS) == a)

    g_in = nonzero_poly(rng, max_deg=2, max_terms=3)
    if not b.is_zero:
        expect("exact division", div_exact(a * b, b) == a)
    p, q = a * g_in, b * g_in
    if not (p.is_zero or q.is_zero):
        g = gcd_poly(p, q)
        expect("gcd divides both", divides(g, p) and divides(g, q))
        expect("gcd is the greatest", divides(g_in, g))
        expect("gcd matches sympy", same_up_to_unit(g, parse_poly(str(sympy.gcd(to_sympy(p), to_sympy(q)).as_expr()).replace("**", "^"), VARS)))

    f = nonzero_poly(rng, max_deg=2, max_terms=3)
    h = nonzero_poly(rng, max_deg=2, max_terms=3)
    prod = f * f * h
    rebuilt = MultiPoly.constant(VARS, 1)
    for s, m in squarefree_decomposition(prod):
        rebuilt = rebuilt * s ** m
    expect("square-free reconstruction", same_up_to_unit(rebuilt, prod))
    fl = factor_list(prod)
    expect("factorization expands back", fl.expand() == prod)

    r = resultant(f, h, "x") if f.degree_in("x") and h.degree_in("x") else None
    if r is not None:
        want = sympy.resultant(to_sympy(f).as_expr(), to_sympy(h).as_expr(), SYMS[0])
        expect("resultant matches sympy", sympy.expand(to_sympy(r).as_expr() - want) == 0)
    return failures
