from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from canardkit.polycore import (
    MultiPoly,
    NotDivisible,
    PolyError,
    PolySyntaxError,
    compile_poly,
    div_exact,
    divides,
    factor_list,
    format_poly,
    gcd_poly,
    parse_poly,
    resultant,
    split_squarefree,
    squarefree_decomposition,
    squarefree_factor,
    substitute,
    tokenize,
)

from polygen import VARS, check_case, same_up_to_unit, to_sympy

P = lambda s: parse_poly(s, VARS)  # noqa: E731

fractions = st.builds(Fraction, st.integers(-12, 12), st.integers(1, 6))
exponents = st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(exponents, fractions, max_size=5).map(lambda t: MultiPoly(VARS, t))
nonzero = polys.filter(lambda p: not p.is_zero)
small_nonzero = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 1), st.integers(0, 1)), fractions, min_size=1, max_size=3
).map(lambda t: MultiPoly(VARS, t)).filter(lambda p: not p.is_zero)
points = st.fixed_dictionaries({v: fractions for v in VARS})

CASES = 150


# --- parser ---------------------------------------------------------------

def test_parse_canonical_form():
    p = P("(x - y)^2 - x^2 + 2*x*y")
    assert p == P("y^2")
    assert format_poly(P("3 - 1/2*x*y^2 + x^3")) == "x^3 - 1/2*x*y^2 + 3"


def test_parse_rationals_and_division_by_constant():
    assert P("x/4 + 3/6") == MultiPoly(VARS, {(1, 0, 0): Fraction(1, 4), (0, 0, 0): Fraction(1, 2)})
    assert P("(x + y)/2") == P("1/2*x + 1/2*y")
    assert P("x**2") == P("x^2")
    assert P("-(-x)") == P("x")


@pytest.mark.parametrize("src", ["2x", "x +", "x / y", "(x", "x ^ -1", "q + 1", "x / 0", "1.5*x", "x ^ y"])
def test_parse_rejects(src):
    with pytest.raises(PolyError):
        P(src)


def test_syntax_error_position():
    with pytest.raises(PolySyntaxError) as err:
        parse_poly("x +\n  $y", VARS)
    assert (err.value.line, err.value.column) == (2, 3)


def test_tokenize_kinds():
    kinds = [t.kind for t in tokenize("3*x^2")]
    assert kinds[:5] == ["INT", "OP", "IDENT", "OP", "INT"]


# --- basic ring behaviour -------------------------------------------------

def test_grlex_leading_term():
    p = P("x*y + x^2 + z^3")
    assert p.leading_exponent() == (0, 0, 3)
    assert P("x^2 + x*y").leading_exponent() == (2, 0, 0)


def test_mixed_variable_lists_rejected():
    with pytest.raises(PolyError):
        parse_poly("x", ("x", "y")) + parse_poly("x", ("x", "z"))


def test_valuation_and_shift():
    p = P("x^3*y + 2*x^5")
    assert p.valuation("x") == 3
    assert p.shift_power("x", -3) == P("y + 2*x^2")
    assert MultiPoly.zero(VARS).valuation("x") == float("inf")
    with pytest.raises(PolyError):
        p.shift_power("x", -4)


def test_substitute_composes():
    p = P("x^2 - y")
    q = substitute(p, {"x": P("y + z"), "y": Fraction(1, 2)})
    assert q == P("y^2 + 2*y*z + z^2 - 1/2")


def test_compile_matches_exact_eval():
    p = P("1/3*x^3 - x*y*z + 7")
    f = compile_poly(p, VARS)
    assert f(1.5, -2.0, 0.5) == pytest.approx(float(p(x=Fraction(3, 2), y=-2, z=Fraction(1, 2))), rel=1e-15)


# --- gcd, division, factorization ----------------------------------------

def test_div_exact_and_not_divisible():
    assert div_exact(P("x^2 - y^2"), P("x + y")) == P("x - y")
    with pytest.raises(NotDivisible):
        div_exact(P("x^2 + y^2"), P("x + y"))
    assert not divides(P("x + y"), P("x^2 + y^2"))


def test_gcd_known():
    g = gcd_poly(P("(x - y)*(x + 2*y)^2*(z + 1)"), P("(x + 2*y)*(z + 1)^3*(x - 3)"))
    assert same_up_to_unit(g, P("(x + 2*y)*(z + 1)"))
    assert gcd_poly(P("x + 1"), P("y + 1")).is_constant


def test_resultant_eliminates():
    # common root x = 1 iff y = 1
    r = resultant(P("x^2 - y"), P("x - 1"), "x")
    assert same_up_to_unit(r, P("y - 1"))


def test_squarefree_decomposition_multiplicities():
    dec = squarefree_decomposition(P("(x^2 + y^2 + 1)*(x - y)^2*(x + z)^3"))
    by_mult = {m: f for f, m in dec}
    assert set(by_mult) == {1, 2, 3}
    assert same_up_to_unit(by_mult[2], P("x - y"))
    assert same_up_to_unit(by_mult[3], P("x + z"))


def test_transcritical_critical_polynomial_splits():
    fl = factor_list(parse_poly("(x^2 - y^2)*(x^2 - 4*y^2)", ("x", "y")))
    assert len(fl.factors) == 4 and all(m == 1 and f.degree() == 1 for f, m in fl.factors)
    assert not fl.unsplit


def test_pitchfork_splits_into_lines_and_parabola():
    fl = factor_list(parse_poly("(x^2 - y)*(4*x^2 - y^2)", ("x", "y")))
    degs = sorted(f.degree() for f, _ in fl.factors)
    assert degs == [1, 1, 2]


def test_irreducible_quadratic_stays_whole():
    fs, _ = split_squarefree(parse_poly("x^2 + y^2 + 1", ("x", "y")))
    assert len(fs) == 1


def test_factor_constant_and_zero():
    assert factor_list(P("-5/2")).expand() == P("-5/2")
    with pytest.raises(PolyError):
        factor_list(MultiPoly.zero(VARS))


def test_squarefree_factor_against_sympy():
    p = P("(x - 2*y)^3*(x + y)*(y - z^2)^2")
    mine = {(str(f.monic()), m) for f, m in squarefree_factor(p)}
    _, theirs = sympy.factor_list(to_sympy(p).as_expr())
    want = set()
    for f, m in theirs:
        q = parse_poly(str(sympy.expand(f)).replace("**", "^"), VARS)
        want.add((str(q.monic()), m))
    assert mine == want


# --- properties -----------------------------------------------------------

@settings(max_examples=CASES, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - b) + b == a
    assert a * MultiPoly.constant(VARS, 1) == a


@settings(max_examples=CASES, deadline=None)
@given(polys, polys, st.sampled_from(VARS))
def test_product_rule(a, b, v):
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@settings(max_examples=CASES, deadline=None)
@given(polys, polys, points)
def test_evaluation_homomorphism(a, b, pt):
    assert (a * b - a)(**pt) == a(**pt) * b(**pt) - a(**pt)


@settings(max_examples=CASES, deadline=None)
@given(polys)
def test_print_parse_round_trip(a):
    assert parse_poly(format_poly(a), VARS) == a


@settings(max_examples=CASES, deadline=None)
@given(polys, nonzero)
def test_exact_division(a, b):
    assert div_exact(a * b, b) == a


@settings(max_examples=CASES, deadline=None)
@given(small_nonzero, small_nonzero, small_nonzero)
def test_gcd_properties(a, b, g):
    p, q = a * g, b * g
    d = gcd_poly(p, q)
    assert divides(d, p) and divides(d, q)
    assert divides(g, d)
    want = sympy.gcd(to_sympy(p), to_sympy(q))
    assert same_up_to_unit(d, parse_poly(str(want.as_expr()).replace("**", "^"), VARS))


@settings(max_examples=CASES, deadline=None)
@given(small_nonzero, small_nonzero)
def test_squarefree_reconstruction(f, h):
    p = f * f * h
    rebuilt = MultiPoly.constant(VARS, 1)
    for s, m in squarefree_decomposition(p):
        rebuilt = rebuilt * s ** m
        if not s.is_constant:
            v = s.used_variables()[0]
            assert gcd_poly(s, s.diff(v)).is_constant
    assert same_up_to_unit(rebuilt, p)
    assert factor_list(p).expand() == p


@settings(max_examples=CASES, deadline=None)
@given(small_nonzero, small_nonzero)
def test_resultant_against_sympy(f, h):
    if not (f.degree_in("x") and h.degree_in("x")):
        return
    r = resultant(f, h, "x")
    want = sympy.resultant(to_sympy(f).as_expr(), to_sympy(h).as_expr(), sympy.Symbol("x"))
    assert sympy.expand(to_sympy(r).as_expr() - want) == 0


def test_seeded_invariant_sweep():
    rng = random.Random(20240601)
    failures = [f for _ in range(200) for f in check_case(rng)]
    assert failures == []
