from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canardkit.polycore import MultiPoly, PolyVectorField, parse_poly
from canardkit.stratify import (
    PLANAR,
    Box,
    EvenMultiplicityError,
    StratifyError,
    build_critical_set,
    find_singular_points,
    half_branch_points,
    identity_stratification,
    relaxed_stratifications,
    whitney_stratify,
)
from canardkit.system import PITCHFORK, TRANSCRITICAL


def field(a: str, b: str) -> PolyVectorField:
    return PolyVectorField((parse_poly(a, PLANAR), parse_poly(b, PLANAR)))


def test_transcritical_critical_set():
    cs = build_critical_set(TRANSCRITICAL.X0)
    assert cs.verdict == "singular" and cs.standard_form
    assert sorted(str(b.defining_poly) for b in cs.branches) == ["x + 2*y", "x + y", "x - 2*y", "x - y"]
    pts = find_singular_points(cs, TRANSCRITICAL.box)
    assert len(pts) == 1
    p = pts[0]
    assert p.location == (0, 0) and p.exact and p.pairwise_transversal
    assert sorted(p.incident_branches) == [0, 1, 2, 3]


def test_pitchfork_critical_set():
    cs = build_critical_set(PITCHFORK.X0)
    assert sorted(b.defining_poly.degree() for b in cs.branches) == [1, 1, 2]
    pts = find_singular_points(cs, PITCHFORK.box)
    assert [p.location for p in pts] == [(0, 0)]
    assert pts[0].pairwise_transversal


@pytest.mark.parametrize("system", [TRANSCRITICAL, PITCHFORK])
def test_cofactor_identity(system):
    cs = build_critical_set(system.X0)
    for k in range(2):
        assert cs.common_poly * cs.fast_cofactor[k] * cs.rescale_divisor == cs.X0[k]


def test_common_factor_in_both_components():
    cs = build_critical_set(field("(y - x^2)*(x + 1)", "2*y - 2*x^2"))
    assert len(cs.branches) == 1
    assert not cs.standard_form
    g = cs.fast_cofactor
    assert cs.common_poly * g[0] == cs.X0[0] and cs.common_poly * g[1] == cs.X0[1]


def test_regular_perturbation():
    cs = build_critical_set(field("y", "-x"))
    assert cs.verdict == "not singular" and not cs.branches
    assert cs.warnings


def test_identically_zero_field_rejected():
    with pytest.raises(StratifyError):
        build_critical_set(field("0", "0"))


def test_even_multiplicity_rejected():
    with pytest.raises(EvenMultiplicityError) as err:
        build_critical_set(field("(y - x)^2*(y + x)", "0"))
    assert err.value.multiplicity == 2


def test_odd_multiplicity_rescaled():
    cs = build_critical_set(field("(y - x)^3*(y + x)", "0"))
    assert cs.rescaled
    assert any("rescaled" in w for w in cs.warnings)
    assert cs.common_poly * cs.fast_cofactor[0] * cs.rescale_divisor == cs.X0[0]


def test_tangent_branches_not_transversal():
    cs = build_critical_set(field("y*(y - x^2)", "0"))
    pts = find_singular_points(cs, Box.default())
    assert len(pts) == 1 and not pts[0].pairwise_transversal
    with pytest.raises(StratifyError):
        whitney_stratify(cs, pts[0])


def test_points_outside_box_dropped():
    cs = build_critical_set(field("(y - x - 3)*(y + x - 3)", "0"))
    assert find_singular_points(cs, Box(-1, 1, -1, 1)) == []
    assert [p.location for p in find_singular_points(cs, Box(-1, 1, 0, 4))] == [(0, 3)]


def test_irrational_intersections_are_float():
    # y = x^2 meets y = 2 at x = ±sqrt 2
    cs = build_critical_set(field("(y - x^2)*(y - 2)", "0"))
    pts = find_singular_points(cs, Box(-2, 2, -3, 3))
    assert len(pts) == 2
    assert not any(p.exact for p in pts)
    assert sorted(round(p.as_float()[0], 12) for p in pts) == [round(-2**0.5, 12), round(2**0.5, 12)]


@pytest.mark.parametrize("system, n", [(TRANSCRITICAL, 4), (PITCHFORK, 3)])
def test_whitney_and_relaxed(system, n):
    cs = build_critical_set(system.X0)
    pts = find_singular_points(cs, system.box)
    ws = whitney_stratify(cs, pts[0], system.box, pts)
    assert len(ws.one_dimensional) == 2 * n
    assert all(s.rank_verified for s in ws.one_dimensional)
    assert all(s.closure_links == (0,) for s in ws.one_dimensional)
    relaxed = relaxed_stratifications(ws)
    assert len(relaxed) == n
    for r in relaxed:
        glued = [s for s in r.strata if s.branch_id == r.smooth_branch]
        assert len(glued) == 1 and glued[0].side == 0
        assert len(r.strata) == 2 * n - 1


def test_identity_stratification():
    cs = build_critical_set(field("y - x^2", "0"))
    s = identity_stratification(cs)
    assert s.kind == "identity" and len(s.strata) == 1
    assert relaxed_stratifications(s) == [s]


def test_half_branch_points_exact_on_lines():
    cs = build_critical_set(TRANSCRITICAL.X0)
    p = find_singular_points(cs, TRANSCRITICAL.box)[0]
    for b in cs.branches:
        for side in (-1, 1):
            pts = half_branch_points(b, p, side, TRANSCRITICAL.box, 8)
            assert len(pts) == 8
            assert all(isinstance(c, Fraction) for q in pts for c in q)
            assert all(b.value(q) == 0 for q in pts)


slopes = st.lists(
    st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4)), min_size=2, max_size=4, unique=True
)


@settings(max_examples=60, deadline=None)
@given(slopes)
def test_lines_through_origin(ms):
    """N distinct lines through the origin: one transversal point, 2N half-branches."""
    prod = MultiPoly.constant(PLANAR, 1)
    y, x = MultiPoly.var(PLANAR, "y"), MultiPoly.var(PLANAR, "x")
    for m in ms:
        prod = prod * (y - x * m)
    cs = build_critical_set(PolyVectorField((prod, MultiPoly.zero(PLANAR))))
    assert len(cs.branches) == len(ms)
    box = Box(-1, 1, -1, 1)
    pts = find_singular_points(cs, box)
    assert [p.location for p in pts] == [(0, 0)]
    assert pts[0].pairwise_transversal
    ws = whitney_stratify(cs, pts[0], box, pts)
    assert len(ws.one_dimensional) == 2 * len(ms)
