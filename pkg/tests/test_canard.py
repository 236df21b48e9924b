from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from canardkit.canard import (
    AssumptionViolation,
    FastFrame,
    detect_singular_canards,
    project_rho,
    wedge_condition,
)
from canardkit.polycore import MultiPoly, PolyVectorField, format_poly, parse_poly
from canardkit.stratify import PLANAR, Box, build_critical_set, find_singular_points, half_branch_points
from canardkit.system import PITCHFORK, TRANSCRITICAL

X, Y = sympy.symbols("x y")


def analyse(X0, X1, box=Box(-1, 1, -1, 1)):
    cs = build_critical_set(X0)
    pts = find_singular_points(cs, box)
    return cs, pts, detect_singular_canards(X1, cs, pts[0], box=box, others=pts)


def sympy_wedges(system, branches):
    """Independent oracle: X1(0) wedged with (-F_y, F_x)(0), each F matched to a sympy factor."""
    A = sympy.sympify(system.X0_src[0].replace("^", "**"))
    factors = [f for f, _ in sympy.factor_list(A)[1]]
    v = [sympy.sympify(s.replace("^", "**")).subs({X: 0, Y: 0}) for s in system.X1_src]
    out = {}
    for b in branches:
        F = sympy.sympify(format_poly(b).replace("^", "**"))
        assert sum(sympy.simplify(F / g).is_number for g in factors) == 1
        fx, fy = (sympy.diff(F, s).subs({X: 0, Y: 0}) for s in (X, Y))
        out[str(b)] = v[0] * fx + v[1] * fy
    return out


@pytest.mark.parametrize("system", [TRANSCRITICAL, PITCHFORK])
def test_wedge_values_match_sympy(system):
    _, _, rep = analyse(system.X0, system.X1)
    oracle = sympy_wedges(system, [v.defining_poly for v in rep.per_branch])
    assert len(oracle) == len(sympy.factor_list(sympy.sympify(system.X0_src[0].replace("^", "**")))[1])
    for v in rep.per_branch:
        assert isinstance(v.wedge_value, Fraction)
        assert v.wedge_value == Fraction(str(oracle[str(v.defining_poly)]))


def test_transcritical_wedge_values():
    _, _, rep = analyse(TRANSCRITICAL.X0, TRANSCRITICAL.X1)
    got = {str(v.defining_poly): v.wedge_value for v in rep.per_branch}
    assert got == {"x + 2*y": 2, "x + y": Fraction(3, 2), "x - 2*y": 0, "x - y": Fraction(1, 2)}
    assert rep.canard_branches == tuple(v.branch_id for v in rep.per_branch if str(v.defining_poly) == "x - 2*y")


def test_pitchfork_wedge_values():
    _, _, rep = analyse(PITCHFORK.X0, PITCHFORK.X1)
    got = {str(v.defining_poly): v.wedge_value for v in rep.per_branch}
    assert got == {"x + 1/2*y": -1, "x - 1/2*y": -1, "x^2 - y": 0}


@pytest.mark.parametrize("system", [TRANSCRITICAL, PITCHFORK])
def test_canard_branch_orientation(system):
    _, _, rep = analyse(system.X0, system.X1)
    (bid,) = rep.canard_branches
    v = rep.verdict(bid)
    assert set(v.stability.values()) == {"attracting", "repelling"}
    assert v.orientation_note == "attracting→repelling"
    assert not v.reduced_flow_equilibria_found


@pytest.mark.parametrize("system, alpha", [(TRANSCRITICAL, Fraction(1, 2)), (PITCHFORK, Fraction(-1, 2))])
def test_reduced_flow_limit_at_ps(system, alpha):
    """Approaching p_s from either side along the canard branch, alpha tends to a finite nonzero value."""
    cs, pts, rep = analyse(system.X0, system.X1)
    b = cs.branch(rep.canard_branches[0])
    frame = FastFrame.from_critical_set(cs)
    for side in (-1, 1):
        near = half_branch_points(b, pts[0], side, system.box, 1000)[:3]
        for q in near:
            s = project_rho(system.X1, q, b, frame)
            assert s.well_defined and s.residual == 0
            assert s.tangent_component == alpha


def test_projection_at_vertex_is_degenerate():
    # the parabola is tangent to the horizontal fast fibre at its vertex
    cs, pts, rep = analyse(PITCHFORK.X0, PITCHFORK.X1)
    b = cs.branch(rep.canard_branches[0])
    s = project_rho(PITCHFORK.X1, pts[0].location, b, FastFrame.from_critical_set(cs), pts[0])
    assert s.at_singular_point and not s.well_defined


def test_rotated_perturbation_has_no_canard():
    X1 = PolyVectorField((parse_poly("1", PLANAR), parse_poly("51/100", PLANAR)))
    _, _, rep = analyse(TRANSCRITICAL.X0, X1)
    assert rep.canard_branches == ()
    got = {str(v.defining_poly): v.wedge_value for v in rep.per_branch}
    assert got["x - 2*y"] == Fraction(-1, 50)


def test_vanishing_x1_violates_assumption():
    X1 = PolyVectorField((parse_poly("x", PLANAR), parse_poly("y", PLANAR)))
    with pytest.raises(AssumptionViolation):
        analyse(TRANSCRITICAL.X0, X1)


def test_non_transversal_point_rejected():
    X0 = PolyVectorField((parse_poly("y*(y - x^2)", PLANAR), parse_poly("0", PLANAR)))
    cs = build_critical_set(X0)
    p = find_singular_points(cs, Box.default())[0]
    with pytest.raises(AssumptionViolation):
        detect_singular_canards(TRANSCRITICAL.X1, cs, p)


def test_wedge_is_exact_rational():
    cs = build_critical_set(TRANSCRITICAL.X0)
    p = find_singular_points(cs, TRANSCRITICAL.box)[0]
    assert all(isinstance(wedge_condition(TRANSCRITICAL.X1, p, b), Fraction) for b in cs.branches)


slope_sets = st.lists(st.builds(Fraction, st.integers(-5, 5), st.integers(1, 3)), min_size=2, max_size=4, unique=True)


@settings(max_examples=40, deadline=None)
@given(slope_sets, st.data())
def test_x1_along_one_line_selects_it(ms, data):
    """Constant X1 parallel to exactly one branch: that branch alone has zero wedge."""
    j = data.draw(st.integers(0, len(ms) - 1))
    x, y = MultiPoly.var(PLANAR, "x"), MultiPoly.var(PLANAR, "y")
    prod = MultiPoly.constant(PLANAR, 1)
    for m in ms:
        prod = prod * (y - x * m)
    X0 = PolyVectorField((prod, MultiPoly.zero(PLANAR)))
    X1 = PolyVectorField((MultiPoly.constant(PLANAR, 1), MultiPoly.constant(PLANAR, ms[j])))
    cs, _, rep = analyse(X0, X1)
    zero = [v for v in rep.per_branch if v.wedge_value == 0]
    assert len(zero) == 1
    assert zero[0].defining_poly.monic() == (y - x * ms[j]).monic()
    assert all(v.exact for v in rep.per_branch)
