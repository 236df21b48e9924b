"""Critical sets of planar slow-fast systems, their singular points and strata."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .polycore import (
    MultiPoly,
    PolyError,
    PolyVectorField,
    div_exact,
    factor_list,
    gcd_poly,
    resultant,
)
from .polycore import univariate as U

PLANAR = ("x", "y")
POINT_TOL = 1e-10


class StratifyError(ValueError):
    """Input the critical-set machinery cannot handle."""


class EvenMultiplicityError(StratifyError):
    def __init__(self, factor: MultiPoly, multiplicity: int):
        super().__init__(f"even multiplicity {multiplicity} of factor {factor}; even powers are not supported")
        self.factor = factor
        self.multiplicity = multiplicity


def planar(p: MultiPoly) -> MultiPoly:
    """Re-embed a polynomial into the (x, y) variable list."""
    try:
        return p.with_variables(PLANAR)
    except PolyError as exc:
        raise StratifyError(f"planar polynomial expected: {exc}") from None


def planar_field(X: PolyVectorField | Sequence[MultiPoly]) -> PolyVectorField:
    comps = tuple(X)
    if len(comps) != 2:
        raise StratifyError(f"planar field needs 2 components, got {len(comps)}")
    return PolyVectorField(tuple(planar(c) for c in comps))


@dataclass(frozen=True)
class Box:
    xmin: Fraction
    xmax: Fraction
    ymin: Fraction
    ymax: Fraction

    def __post_init__(self):
        for name in ("xmin", "xmax", "ymin", "ymax"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise StratifyError(f"box must have positive area: {self}")

    @classmethod
    def default(cls) -> "Box":
        return cls(-1, 1, -1, 1)

    def contains(self, p, tol: float = 0.0) -> bool:
        x, y = p
        return (self.xmin - tol <= x <= self.xmax + tol) and (self.ymin - tol <= y <= self.ymax + tol)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True)
class Branch:
    id: int
    defining_poly: MultiPoly
    gradient: tuple[MultiPoly, MultiPoly]
    multiplicity: int = 1
    split_complete: bool = True

    @classmethod
    def from_poly(cls, id: int, f: MultiPoly, multiplicity: int = 1, split_complete: bool = True) -> "Branch":
        f = planar(f)
        if f.is_constant:
            raise StratifyError("a branch needs a non-constant defining polynomial")
        return cls(id, f, (f.diff("x"), f.diff("y")), multiplicity, split_complete)

    def value(self, p):
        return self.defining_poly(x=p[0], y=p[1])

    def grad(self, p):
        return (self.gradient[0](x=p[0], y=p[1]), self.gradient[1](x=p[0], y=p[1]))

    def contains(self, p) -> bool:
        v = self.value(p)
        return v == 0 if isinstance(v, Fraction) else abs(v) < POINT_TOL


@dataclass(frozen=True)
class CriticalSet:
    """C = V(F) together with the fast cofactor.

    ``common_poly * fast_cofactor[k] * rescale_divisor == X0[k]``; the divisor
    is 1 unless odd powers were removed from the common factor.
    """

    X0: PolyVectorField
    branches: tuple[Branch, ...]
    common_poly: MultiPoly
    fast_cofactor: tuple[MultiPoly, MultiPoly]
    standard_form: bool
    rescale_divisor: MultiPoly
    warnings: tuple[str, ...] = ()

    @property
    def singular(self) -> bool:
        """True when C is one-dimensional, i.e. the perturbation is singular."""
        return not self.common_poly.is_constant

    @property
    def verdict(self) -> str:
        return "singular" if self.singular else "not singular"

    @property
    def rescaled(self) -> bool:
        return not self.rescale_divisor.is_constant

    def branch(self, bid: int) -> Branch:
        for b in self.branches:
            if b.id == bid:
                return b
        raise KeyError(bid)

    @cached_property
    def desingularized(self) -> PolyVectorField:
        """X0 / D: the field whose critical set is V(F) with square-free F."""
        F = self.common_poly
        return PolyVectorField((F * self.fast_cofactor[0], F * self.fast_cofactor[1]))

    @cached_property
    def jacobian(self) -> tuple[tuple[MultiPoly, MultiPoly], tuple[MultiPoly, MultiPoly]]:
        A, B = self.desingularized
        return ((A.diff("x"), A.diff("y")), (B.diff("x"), B.diff("y")))

    def jacobian_at(self, p) -> np.ndarray | list:
        J = self.jacobian
        vals = [[e(x=p[0], y=p[1]) for e in row] for row in J]
        if all(isinstance(v, Fraction) for row in vals for v in row):
            return vals
        return np.array(vals, dtype=float)

    def transverse_eigenvalue(self, p):
        """trace DX0 at a point of C: the nonzero eigenvalue of a rank-1 Jacobian."""
        J = self.jacobian_at(p)
        return J[0][0] + J[1][1]

    def cofactor_at(self, p):
        return (self.fast_cofactor[0](x=p[0], y=p[1]), self.fast_cofactor[1](x=p[0], y=p[1]))


def _normalize_cofactor(F: MultiPoly, A_hat: MultiPoly, B_hat: MultiPoly):
    # push constants into F so the first nonzero cofactor component is monic
    lead = (A_hat if not A_hat.is_zero else B_hat).leading_coefficient()
    return F * lead, A_hat / lead, B_hat / lead


def odd_power_rescale(P: MultiPoly, factors: Iterable[tuple[MultiPoly, int]]) -> MultiPoly:
    """Divide P by prod f^(m-1) over its factorization; every m must be odd."""
    D = MultiPoly.constant(P.variables, 1)
    for f, m in factors:
        if m % 2 == 0:
            raise EvenMultiplicityError(f, m)
        if m > 1:
            D = D * f ** (m - 1)
    return div_exact(P, D)


def build_critical_set(X0: PolyVectorField | Sequence[MultiPoly]) -> CriticalSet:
    """Common components of X0, its cofactor and the singular/regular verdict."""
    X0 = planar_field(X0)
    A, B = X0
    if A.is_zero and B.is_zero:
        raise StratifyError("X0 vanishes identically")
    one = MultiPoly.constant(PLANAR, 1)
    standard = A.is_zero or B.is_zero
    common = B if A.is_zero else A if B.is_zero else gcd_poly(A, B)
    warnings: list[str] = []
    if common.is_constant:
        return CriticalSet(X0, (), one, (A, B), standard, one, ("no common component: regular perturbation",))
    fl = factor_list(common)
    for f in fl.unsplit:
        warnings.append(f"factor {f} of degree {f.degree()} was not split further")
    factors = list(fl.factors)
    for f, m in factors:
        if m % 2 == 0:
            raise EvenMultiplicityError(f, m)
    F, D = one, one
    for f, m in factors:
        F = F * f
        if m > 1:
            D = D * f ** (m - 1)
            warnings.append(f"factor {f} has odd multiplicity {m}; rescaled by its power {m - 1}")
    FD = F * D
    A_hat, B_hat = div_exact(A, FD), div_exact(B, FD)
    F, A_hat, B_hat = _normalize_cofactor(F, A_hat, B_hat)
    unsplit = set(fl.unsplit)
    branches = tuple(
        Branch.from_poly(i, f, m, f not in unsplit) for i, (f, m) in enumerate(factors)
    )
    return CriticalSet(X0, branches, F, (A_hat, B_hat), standard, D, tuple(warnings))


# ---------------------------------------------------------------------------
# singular points


@dataclass(frozen=True)
class SingularPoint:
    location: tuple
    incident_branches: tuple[int, ...]
    pairwise_transversal: bool
    exact: bool = True
    determinants: tuple[tuple[tuple[int, int], object], ...] = ()
    self_singular: tuple[int, ...] = ()

    @property
    def x(self):
        return self.location[0]

    @property
    def y(self):
        return self.location[1]

    def as_float(self) -> tuple[float, float]:
        return (float(self.location[0]), float(self.location[1]))


def _eliminate(f: MultiPoly, g: MultiPoly) -> tuple[str, MultiPoly]:
    """Resultant eliminating y (or x when neither depends on y)."""
    if f.degree_in("y") <= 0 and g.degree_in("y") <= 0:
        return "x", resultant(f, g, "x")
    return "y", resultant(f, g, "y")


def _newton2(f: Branch, g: Branch, p, iters: int = 50):
    x, y = float(p[0]), float(p[1])
    for _ in range(iters):
        F = np.array([float(f.value((x, y))), float(g.value((x, y)))])
        if np.max(np.abs(F)) < 1e-15:
            break
        J = np.array([[float(v) for v in f.grad((x, y))], [float(v) for v in g.grad((x, y))]])
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        x, y = x + dx[0], y + dx[1]
        if np.max(np.abs(dx)) < 1e-16:
            break
    return (x, y)


def _univariate_at(p: MultiPoly, var: str, other: str, value) -> list:
    """Coefficients (ascending in ``other``) of p with ``var`` fixed to ``value``."""
    coeffs = p.coefficients_in(other)
    n = max(coeffs)
    return [coeffs[k](**{var: value}) if k in coeffs else 0 for k in range(n + 1)]


def _pair_intersections(f: Branch, g: Branch, box: Box) -> list[tuple]:
    var, res = _eliminate(f.defining_poly, g.defining_poly)
    if res.is_zero:
        raise StratifyError(f"branches {f.defining_poly} and {g.defining_poly} share a component")
    if res.is_constant:
        return []
    other = "x" if var == "y" else "y"
    lo, hi = (box.xmin, box.xmax) if other == "x" else (box.ymin, box.ymax)
    c = U.from_multipoly(res, other)
    roots = [(r, True) for r in U.rational_roots(c) if lo <= r <= hi]
    exact_vals = {r for r, _ in roots}
    for rr in U.isolate_real_roots(c, lo, hi):
        if rr.exact is None and not any(rr.lo <= r <= rr.hi for r in exact_vals):
            roots.append((rr.approx, False))
    out = []
    for t0, exact in roots:
        if exact:
            cf = U.trim(_univariate_at(f.defining_poly, other, var, t0))
            cg = U.trim(_univariate_at(g.defining_poly, other, var, t0))
            if not cf or not cg:
                # one branch contains the whole line other = t0
                h = cg if not cf else cf
                if not h:
                    raise StratifyError("branches share a component")
                common = h
            else:
                common = U.gcd(cf, cg)
            if len(common) <= 1:
                continue
            vlo, vhi = (box.ymin, box.ymax) if var == "y" else (box.xmin, box.xmax)
            for s in U.rational_roots(common):
                if vlo <= s <= vhi:
                    out.append(((t0, s) if other == "x" else (s, t0), True))
            for rr in U.isolate_real_roots(common, vlo, vhi):
                if rr.exact is None and U.evaluate(common, rr.hi) != 0 and not any(
                    rr.lo <= s <= rr.hi for s in U.rational_roots(common)
                ):
                    q = (t0, rr.approx) if other == "x" else (rr.approx, t0)
                    out.append((_newton2(f, g, q), False))
        else:
            cf = [float(v) for v in _univariate_at(f.defining_poly, other, var, t0)]
            cands = np.roots(cf[::-1]) if len(np.trim_zeros(cf, "b")) > 1 else []
            for s in cands:
                if abs(s.imag) > 1e-6:
                    continue
                q = (t0, s.real) if other == "x" else (s.real, t0)
                q = _newton2(f, g, q)
                if abs(float(g.value(q))) < 1e-9 and abs(float(f.value(q))) < 1e-9 and box.contains(q, 1e-12):
                    out.append((q, False))
    return out


def _same_point(p, q) -> bool:
    return abs(float(p[0]) - float(q[0])) < 1e-9 and abs(float(p[1]) - float(q[1])) < 1e-9


def gradient_determinant(f: Branch, g: Branch, p):
    (fx, fy), (gx, gy) = f.grad(p), g.grad(p)
    return fx * gy - fy * gx


def _is_zero(v) -> bool:
    return v == 0 if isinstance(v, Fraction) else abs(v) < POINT_TOL


def find_singular_points(cs: CriticalSet, box: Box | None = None) -> list[SingularPoint]:
    """Points of the box where two branches meet or a branch is itself singular."""
    box = box or Box.default()
    cands: list[tuple[tuple, bool]] = []

    def add(p, exact):
        for i, (q, e) in enumerate(cands):
            if _same_point(p, q):
                if exact and not e:
                    cands[i] = (p, exact)
                return
        cands.append((p, exact))

    for f, g in combinations(cs.branches, 2):
        for p, exact in _pair_intersections(f, g, box):
            add(p, exact)
    # singular points of a single branch: F = Fx = Fy = 0
    for b in cs.branches:
        if b.defining_poly.degree() < 2:
            continue
        for k, dk in enumerate(b.gradient):
            if dk.is_constant:
                continue
            aux = Branch(-1, dk, (dk.diff("x"), dk.diff("y")))
            try:
                pts = _pair_intersections(b, aux, box)
            except StratifyError:
                continue
            for p, exact in pts:
                if all(_is_zero(v) for v in b.grad(p)):
                    add(p, exact)
            break
    out = []
    for p, exact in cands:
        if exact:
            p = (Fraction(p[0]), Fraction(p[1]))
        else:
            p = (float(p[0]), float(p[1]))
        incident = tuple(b.id for b in cs.branches if b.contains(p))
        self_sing = tuple(b.id for b in cs.branches if b.id in incident and all(_is_zero(v) for v in b.grad(p)))
        if len(incident) < 2 and not self_sing:
            continue
        dets = []
        transversal = not self_sing
        for i, j in combinations(incident, 2):
            d = gradient_determinant(cs.branch(i), cs.branch(j), p)
            dets.append(((i, j), d))
            if _is_zero(d):
                transversal = False
        out.append(SingularPoint(p, incident, transversal, exact, tuple(dets), self_sing))
    out.sort(key=lambda s: (float(s.location[0]), float(s.location[1])))
    return out


# ---------------------------------------------------------------------------
# half-branch sampling


def branch_tangent(branch: Branch, p):
    gx, gy = branch.grad(p)
    return (-gy, gx)


def _solve_other(branch: Branch, k: int, s, guess):
    """Point of the branch with coordinate k fixed to s, near ``guess``."""
    var, other = PLANAR[k], PLANAR[1 - k]
    coeffs = _univariate_at(branch.defining_poly, var, other, s)
    c = [v for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    if len(c) == 2 and isinstance(c[0], Fraction) and isinstance(c[1], Fraction):
        v = -c[0] / c[1]
    elif len(c) == 2:
        v = -float(c[0]) / float(c[1])
    else:
        v = float(guess)
        dpoly = [i * float(a) for i, a in enumerate(c)][1:]
        for _ in range(60):
            fv = sum(float(a) * v**i for i, a in enumerate(c))
            dv = sum(a * v**i for i, a in enumerate(dpoly))
            if dv == 0:
                break
            step = fv / dv
            v -= step
            if abs(step) < 1e-15 * (1 + abs(v)):
                break
    return (s, v) if k == 0 else (v, s)


def half_branch_points(
    branch: Branch,
    point: SingularPoint,
    side: int,
    box: Box,
    n: int,
    avoid: Sequence[SingularPoint] = (),
) -> list[tuple]:
    """``n`` points on the half-branch leaving ``point`` in direction ``side``·tangent.

    The branch is treated as a graph over the coordinate with the larger
    tangent component. Coordinates are exact rationals whenever the branch is
    linear in the dependent coordinate and the singular point is rational.
    """
    p = point.location
    t = branch_tangent(branch, p)
    k = 0 if abs(t[0]) >= abs(t[1]) else 1
    direction = side * (1 if t[k] > 0 else -1)
    lo, hi = (box.xmin, box.xmax) if k == 0 else (box.ymin, box.ymax)
    reach = (hi - p[k]) if direction > 0 else (p[k] - lo)
    for q in avoid:
        if q is point or _same_point(q.location, p):
            continue
        d = max(abs(q.location[0] - p[0]), abs(q.location[1] - p[1]))
        reach = min(reach, d / 2)
    if reach <= 0:
        return []
    slope = t[1 - k] / t[k]
    pts = []
    prev_other = p[1 - k]
    exact = point.exact
    for j in range(1, n + 1):
        step = reach * Fraction(j, n) if exact else float(reach) * j / n
        s = p[k] + direction * step
        guess = prev_other + direction * (reach / n if exact else float(reach) / n) * float(slope)
        q = _solve_other(branch, k, s, guess)
        if not box.contains(q, 1e-12):
            break
        pts.append(q)
        prev_other = q[1 - k]
    return pts


# ---------------------------------------------------------------------------
# stratifications


@dataclass(frozen=True)
class Stratum:
    id: int
    dimension: int
    branch_id: int | None = None
    side: int = 0  # +1 / -1 half-branch, 0 for a point or a full branch
    closure_links: tuple[int, ...] = ()
    rank_verified: bool | None = None

    @property
    def tag(self) -> str:
        if self.dimension == 0:
            return "p_s"
        if self.side == 0:
            return f"B{self.branch_id}"
        return f"B{self.branch_id}{'+' if self.side > 0 else '-'}"


@dataclass(frozen=True)
class Stratification:
    kind: str  # whitney | relaxed | identity
    point: SingularPoint | None
    strata: tuple[Stratum, ...]
    smooth_branch: int | None = None

    @property
    def one_dimensional(self) -> tuple[Stratum, ...]:
        return tuple(s for s in self.strata if s.dimension == 1)


RANK_SAMPLES = 16


def _rank_is_one(J) -> bool:
    if isinstance(J, list):
        nonzero = any(v != 0 for row in J for v in row)
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        return nonzero and det == 0
    s = np.linalg.svd(np.asarray(J, dtype=float), compute_uv=False)
    scale = max(s[0], 1e-300)
    return s[0] > 1e-12 and s[1] / scale < 1e-8


def whitney_stratify(
    cs: CriticalSet,
    p: SingularPoint,
    box: Box | None = None,
    others: Sequence[SingularPoint] = (),
) -> Stratification:
    """2N half-branch strata plus {p_s}; DX0 rank checked along each half-branch."""
    if not p.pairwise_transversal:
        raise StratifyError(f"singular point {p.location} is not pairwise transversal")
    box = box or Box.default()
    strata = [Stratum(0, 0)]
    sid = 1
    for bid in p.incident_branches:
        b = cs.branch(bid)
        for side in (-1, 1):
            pts = half_branch_points(b, p, side, box, RANK_SAMPLES, others)
            ok = bool(pts) and all(_rank_is_one(cs.jacobian_at(q)) for q in pts)
            strata.append(Stratum(sid, 1, bid, side, (0,), ok))
            sid += 1
    return Stratification("whitney", p, tuple(strata))


def relaxed_stratifications(ws: Stratification) -> list[Stratification]:
    """One relaxed stratification per branch: its two halves glued through p_s."""
    if ws.point is None or ws.kind != "whitney":
        return [ws] if ws.kind == "identity" else []
    halves = ws.one_dimensional
    out = []
    for bid in dict.fromkeys(s.branch_id for s in halves):
        pair = [s for s in halves if s.branch_id == bid]
        strata = [Stratum(0, 1, bid, 0, (), all(bool(s.rank_verified) for s in pair))]
        for i, s in enumerate((s for s in halves if s.branch_id != bid), start=1):
            strata.append(Stratum(i, 1, s.branch_id, s.side, (), s.rank_verified))
        out.append(Stratification("relaxed", ws.point, tuple(strata), bid))
    return out


def identity_stratification(cs: CriticalSet) -> Stratification:
    """A smooth critical set with no singular point is its own stratification."""
    return Stratification(
        "identity", None, tuple(Stratum(i, 1, b.id) for i, b in enumerate(cs.branches))
    )
