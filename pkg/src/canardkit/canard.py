"""Reduced flow on the branches and the exact singular-canard condition."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import MultiPoly, PolyVectorField
from .stratify import (
    POINT_TOL,
    Box,
    Branch,
    CriticalSet,
    SingularPoint,
    StratifyError,
    half_branch_points,
    planar_field,
)

WEDGE_TOL = 1e-10
ALPHA_TOL = 1e-10
FLOW_SAMPLES = 64
STABILITY_SAMPLES = 8


class CanardError(ValueError):
    pass


class AssumptionViolation(CanardError):
    """A standing hypothesis of the method fails for this input."""


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _zero(v) -> bool:
    return v == 0 if _is_exact(v) else abs(v) < POINT_TOL


@dataclass(frozen=True)
class FastFrame:
    generator: tuple[MultiPoly, MultiPoly]

    @classmethod
    def from_critical_set(cls, cs: CriticalSet) -> "FastFrame":
        return cls(cs.fast_cofactor)

    def at(self, p):
        return (self.generator[0](x=p[0], y=p[1]), self.generator[1](x=p[0], y=p[1]))

    def audit(self, branch: Branch, points: Sequence) -> list[str]:
        """Problems with the frame along sampled branch points."""
        issues = []
        for q in points:
            g = self.at(q)
            if all(_zero(c) for c in g):
                issues.append(f"fast generator vanishes at {tuple(float(c) for c in q)} on branch {branch.id}")
                continue
            t = tangent_at(branch, q)
            if _zero(t[0] * g[1] - t[1] * g[0]):
                issues.append(f"fast generator tangent to branch {branch.id} at {tuple(float(c) for c in q)}")
        return issues


def tangent_at(branch: Branch, p) -> tuple:
    """Rotated gradient (-F_y, F_x) at a point of the branch."""
    if not branch.contains(p):
        raise CanardError(f"point {p} is not on branch {branch.defining_poly}")
    gx, gy = branch.grad(p)
    if _zero(gx) and _zero(gy):
        raise CanardError(f"branch {branch.defining_poly} is singular at {p}")
    return (-gy, gx)


def wedge(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _x1_at(X1: PolyVectorField, p):
    X1 = planar_field(X1)
    return tuple(c(x=p[0], y=p[1]) for c in X1)


def wedge_condition(X1: PolyVectorField, p_s: SingularPoint, branch: Branch):
    """X1(p_s) ∧ T_{p_s}V(F_i); an exact Fraction when p_s is rational.

    For an irrational p_s the value is a float; compare with ``WEDGE_TOL``.
    """
    v = _x1_at(X1, p_s.location)
    if all(_zero(c) for c in v):
        raise AssumptionViolation("‖X1(p_s)‖ = O(1) violated: X1 vanishes at the singular point")
    return wedge(v, tangent_at(branch, p_s.location))


def wedge_is_zero(value) -> bool:
    return value == 0 if _is_exact(value) else abs(value) < WEDGE_TOL


@dataclass(frozen=True)
class ReducedFlowSample:
    point: tuple
    tangent_component: object  # alpha
    well_defined: bool
    fast_component: object = None  # beta
    residual: float = 0.0
    at_singular_point: bool = False
    vector: tuple = ()


def project_rho(
    X1: PolyVectorField,
    p,
    branch: Branch,
    frame: FastFrame,
    singular_point: SingularPoint | None = None,
) -> ReducedFlowSample:
    """Split X1(p) = alpha t + beta g along the branch tangent t and fast direction g."""
    v = _x1_at(X1, p)
    at_ps = singular_point is not None and all(
        (a == b) if _is_exact(a) and _is_exact(b) else abs(float(a) - float(b)) < POINT_TOL
        for a, b in zip(p, singular_point.location)
    )
    t = tangent_at(branch, p)
    g = frame.at(p)
    det = wedge(t, g)
    if _zero(det):
        return ReducedFlowSample(tuple(p), 0, False, None, float("nan"), at_ps, v)
    alpha = wedge(v, g) / det
    beta = wedge(t, v) / det
    rx = v[0] - alpha * t[0] - beta * g[0]
    ry = v[1] - alpha * t[1] - beta * g[1]
    return ReducedFlowSample(tuple(p), alpha, True, beta, float(max(abs(rx), abs(ry))), at_ps, v)


@dataclass(frozen=True)
class BranchVerdict:
    branch_id: int
    defining_poly: MultiPoly
    tangent_at_ps: tuple
    wedge_value: object
    exact: bool
    is_canard: bool
    reduced_flow_equilibria_found: tuple
    orientation_note: str
    stability: dict  # side -> attracting | repelling | mixed
    flow_direction: dict  # side -> +1 / -1 / 0 sign of alpha near p_s


@dataclass(frozen=True)
class CanardReport:
    singular_point: SingularPoint
    per_branch: tuple[BranchVerdict, ...]
    warnings: tuple[str, ...] = ()

    @property
    def canard_branches(self) -> tuple[int, ...]:
        return tuple(v.branch_id for v in self.per_branch if v.is_canard)

    def verdict(self, branch_id: int) -> BranchVerdict:
        for v in self.per_branch:
            if v.branch_id == branch_id:
                return v
        raise KeyError(branch_id)


def classify_half_branch(cs: CriticalSet, points: Sequence) -> str:
    lams = [float(cs.transverse_eigenvalue(q)) for q in points]
    if lams and all(l < 0 for l in lams):
        return "attracting"
    if lams and all(l > 0 for l in lams):
        return "repelling"
    return "mixed"


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _scan_equilibria(samples: list[ReducedFlowSample]) -> list[tuple]:
    found = []
    prev = None
    for s in samples:
        if not s.well_defined:
            prev = None
            continue
        a = float(s.tangent_component)
        if abs(a) < ALPHA_TOL:
            found.append(tuple(float(c) for c in s.point))
        elif prev is not None and _sign(a) * _sign(float(prev.tangent_component)) < 0:
            found.append(("between", tuple(float(c) for c in prev.point), tuple(float(c) for c in s.point)))
        prev = s
    return found


def _refine_equilibrium(X1, branch, frame, a, b, cs_points_solver, iters: int = 60):
    # bisection along the straight segment between two bracketing samples, re-projected to the branch
    fa = float(project_rho(X1, a, branch, frame).tangent_component)
    for _ in range(iters):
        m = cs_points_solver((np.asarray(a) + np.asarray(b)) / 2)
        fm = float(project_rho(X1, m, branch, frame).tangent_component)
        if abs(fm) < ALPHA_TOL:
            return tuple(float(c) for c in m)
        if _sign(fm) == _sign(fa):
            a, fa = m, fm
        else:
            b = m
        if np.max(np.abs(np.asarray(b, float) - np.asarray(a, float))) < 1e-13:
            break
    return tuple(float(c) for c in a)


def _project_to_branch(branch: Branch, q):
    x, y = float(q[0]), float(q[1])
    for _ in range(50):
        f = float(branch.value((x, y)))
        gx, gy = (float(v) for v in branch.grad((x, y)))
        n2 = gx * gx + gy * gy
        if n2 == 0:
            break
        x, y = x - f * gx / n2, y - f * gy / n2
        if abs(f) < 1e-15:
            break
    return (x, y)


def orientation_note(stability: dict, direction: dict) -> str:
    """Label the passage through p_s from the half-branch flowing in to the one flowing out."""
    d_minus, d_plus = direction.get(-1, 0), direction.get(1, 0)
    if d_minus == 0 or d_plus == 0 or d_minus != d_plus:
        return "mixed"
    incoming, outgoing = (-1, 1) if d_plus > 0 else (1, -1)
    a, b = stability[incoming], stability[outgoing]
    if a == "attracting" and b == "repelling":
        return "attracting→repelling"
    if a == "repelling" and b == "attracting":
        return "repelling→attracting"
    return "mixed"


def detect_singular_canards(
    X1: PolyVectorField,
    cs: CriticalSet,
    p_s: SingularPoint,
    frame: FastFrame | None = None,
    box: Box | None = None,
    others: Sequence[SingularPoint] = (),
) -> CanardReport:
    """Wedge test, reduced-flow scan and stability labels for each branch through p_s."""
    if not p_s.pairwise_transversal:
        raise AssumptionViolation(f"singular point {p_s.location} is not pairwise transversal")
    X1 = planar_field(X1)
    frame = frame or FastFrame.from_critical_set(cs)
    box = box or Box.default()
    warnings: list[str] = []
    verdicts = []
    for bid in p_s.incident_branches:
        b = cs.branch(bid)
        w = wedge_condition(X1, p_s, b)
        exact = _is_exact(w)
        is_canard = wedge_is_zero(w)
        stability, direction = {}, {}
        equilibria: list[tuple] = []
        for side in (-1, 1):
            pts = half_branch_points(b, p_s, side, box, FLOW_SAMPLES, others)
            warnings.extend(frame.audit(b, pts))
            samples = [project_rho(X1, q, b, frame) for q in pts]
            for s in samples:
                if not s.well_defined:
                    warnings.append(f"reduced flow undefined at {tuple(float(c) for c in s.point)} on branch {bid}")
            for item in _scan_equilibria(samples):
                if item and item[0] == "between":
                    equilibria.append(
                        _refine_equilibrium(X1, b, frame, item[1], item[2], lambda q: _project_to_branch(b, q))
                    )
                else:
                    equilibria.append(item)
            good = [s for s in samples if s.well_defined]
            direction[side] = _sign(float(good[0].tangent_component)) if good else 0
            step = max(1, len(pts) // STABILITY_SAMPLES)
            stab_pts = pts[step - 1 :: step][:STABILITY_SAMPLES]
            stability[side] = classify_half_branch(cs, stab_pts)
            if stability[side] == "mixed":
                warnings.append(f"half-branch {bid}{'+' if side > 0 else '-'} changes stability or is degenerate")
        if equilibria:
            warnings.append(f"reduced flow on branch {bid} has equilibria near p_s")
        verdicts.append(
            BranchVerdict(
                bid,
                b.defining_poly,
                tangent_at(b, p_s.location),
                w,
                exact,
                is_canard,
                tuple(equilibria),
                orientation_note(stability, direction),
                stability,
                direction,
            )
        )
    return CanardReport(p_s, tuple(verdicts), tuple(dict.fromkeys(warnings)))
