"""Weighted blow-up of the ε-extended field: exact directional charts."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping

from ..polycore import MultiPoly, PolyVectorField, substitute
from ..stratify import planar_field

EXT_VARS = ("x", "y", "eps")
CHART_VARS = ("r", "u", "v")
CHARTS = ("eps", "x+", "x-", "y+", "y-")


class BlowupError(ValueError):
    """Weights or charts that cannot desingularize the given field."""

    def __init__(self, message: str, component: str | None = None):
        super().__init__(message)
        self.component = component


@dataclass(frozen=True)
class Weights:
    a_x: int
    a_y: int
    a_eps: int

    def __post_init__(self):
        vals = (self.a_x, self.a_y, self.a_eps)
        if any(not isinstance(v, int) or v <= 0 for v in vals):
            raise BlowupError(f"weights must be positive integers, got {vals}")
        if gcd(gcd(self.a_x, self.a_y), self.a_eps) != 1:
            raise BlowupError(f"weights {vals} share a common factor")

    @classmethod
    def of(cls, w) -> "Weights":
        return w if isinstance(w, Weights) else cls(*(int(v) for v in w))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a_x, self.a_y, self.a_eps)

    def __iter__(self):
        return iter(self.as_tuple())


def extend_field(X0: PolyVectorField, X1: PolyVectorField) -> PolyVectorField:
    """(X0 + eps X1, 0) over (x, y, eps)."""
    X0, X1 = planar_field(X0), planar_field(X1)
    eps = MultiPoly.var(EXT_VARS, "eps")
    comps = [a.with_variables(EXT_VARS) + eps * b.with_variables(EXT_VARS) for a, b in zip(X0, X1)]
    return PolyVectorField((comps[0], comps[1], MultiPoly.zero(EXT_VARS)))


def as_extended(Xhat: PolyVectorField) -> PolyVectorField:
    comps = tuple(Xhat)
    if len(comps) != 3:
        raise BlowupError(f"extended field needs 3 components, got {len(comps)}")
    return PolyVectorField(tuple(c.with_variables(EXT_VARS) for c in comps))


def split_eps(Xhat: PolyVectorField) -> tuple[PolyVectorField, PolyVectorField]:
    """Split into the eps-free part and the part divisible by eps."""
    i = EXT_VARS.index("eps")
    zero_part, eps_part = [], []
    for c in Xhat:
        t0 = {e: v for e, v in c.terms.items() if e[i] == 0}
        t1 = {e: v for e, v in c.terms.items() if e[i] > 0}
        zero_part.append(MultiPoly(EXT_VARS, t0))
        eps_part.append(MultiPoly(EXT_VARS, t1))
    return PolyVectorField(tuple(zero_part)), PolyVectorField(tuple(eps_part))


def weighted_order(p: MultiPoly, w: Weights) -> float | int:
    """Lowest quasi-homogeneous degree of p (inf for zero)."""
    if p.is_zero:
        return float("inf")
    ws = tuple(w)
    return min(sum(a * e for a, e in zip(ws, exp)) for exp in p.terms)


def weighted_leading_part(p: MultiPoly, w: Weights, degree: int | None = None) -> MultiPoly:
    ws = tuple(w)
    d = weighted_order(p, w) if degree is None else degree
    return MultiPoly(p.variables, {e: c for e, c in p.terms.items() if sum(a * k for a, k in zip(ws, e)) == d})


def division_exponent(Xhat: PolyVectorField, w: Weights) -> float | int:
    """m = min_i (weighted order of component i) - a_i."""
    Xhat = as_extended(Xhat)
    return min(weighted_order(c, w) - a for c, a in zip(Xhat, w))


def _chart_map(w: Weights, chart: str) -> tuple[dict, int, int]:
    """Blow-up map of a chart, index of its fixed coordinate and the sign there."""
    r = MultiPoly.var(CHART_VARS, "r")
    u = MultiPoly.var(CHART_VARS, "u")
    v = MultiPoly.var(CHART_VARS, "v")
    ax, ay, ae = w.as_tuple()
    if chart == "eps":
        return {"x": r**ax * u, "y": r**ay * v, "eps": r**ae}, 2, 1
    if chart in ("x+", "x-"):
        s = 1 if chart == "x+" else -1
        return {"x": r**ax * s, "y": r**ay * v, "eps": r**ae * u}, 0, s
    if chart in ("y+", "y-"):
        s = 1 if chart == "y+" else -1
        return {"x": r**ax * u, "y": r**ay * s, "eps": r**ae * v}, 1, s
    raise BlowupError(f"unknown chart {chart!r}; expected one of {CHARTS}")


# which chart variable carries which ambient coordinate (None for the fixed one)
CHART_ROLES = {
    "eps": {"x": "u", "y": "v", "eps": None},
    "x+": {"x": None, "y": "v", "eps": "u"},
    "x-": {"x": None, "y": "v", "eps": "u"},
    "y+": {"x": "u", "y": None, "eps": "v"},
    "y-": {"x": "u", "y": None, "eps": "v"},
}


class _Laurent:
    """poly / r^shift with poly in chart variables."""

    __slots__ = ("poly", "shift")

    def __init__(self, poly: MultiPoly, shift: int):
        self.poly, self.shift = poly, shift

    def __add__(self, other: "_Laurent") -> "_Laurent":
        s = max(self.shift, other.shift)
        return _Laurent(
            self.poly.shift_power("r", s - self.shift) + other.poly.shift_power("r", s - other.shift), s
        )

    def scale(self, c) -> "_Laurent":
        return _Laurent(self.poly * c, self.shift)

    @property
    def valuation(self):
        return self.poly.valuation("r") - self.shift

    def divided(self, m: int) -> MultiPoly:
        # poly * r^(-shift - m); exact whenever valuation >= m
        return self.poly.shift_power("r", -(self.shift + m))


def _chart_components(Xhat: PolyVectorField, w: Weights, chart: str) -> list[_Laurent]:
    mapping, i0, sigma = _chart_map(w, chart)
    a = w.as_tuple()
    Z = [substitute(c, mapping) for c in Xhat]
    # rdot / r = sigma Z_i0 / (a_i0 r^a_i0)
    rho = _Laurent(Z[i0] * Fraction(sigma, a[i0]), a[i0])
    r = MultiPoly.var(CHART_VARS, "r")
    comps = {"r": _Laurent(rho.poly * r, rho.shift)}
    roles = CHART_ROLES[chart]
    for j, name in enumerate(EXT_VARS):
        var = roles[name]
        if var is None:
            continue
        w_j = MultiPoly.var(CHART_VARS, var)
        # wdot_j = Z_j / r^a_j - a_j w_j rho
        comps[var] = _Laurent(Z[j], a[j]) + _Laurent(rho.poly * w_j * (-a[j]), rho.shift)
    return [comps["r"], comps["u"], comps["v"]]


@dataclass(frozen=True)
class BlownUpChart:
    chart_id: str
    weights: Weights
    field: PolyVectorField  # (rdot, udot, vdot) after division by r^m
    division_exponent: int
    mapping: Mapping[str, MultiPoly]
    valuations: tuple  # (X0 part, eps X1 part) before division
    chart_vars: tuple[str, str, str] = CHART_VARS

    def blowup_map(self, point: Mapping[str, object]) -> tuple:
        return tuple(self.mapping[n](**point) for n in EXT_VARS)

    def pushforward(self, point: Mapping[str, object]) -> tuple:
        """r^m · DΦ · (chart field) at a chart point; equals X̂(Φ(point))."""
        r = point["r"]
        vals = [c(**point) for c in self.field]
        J = [[self.mapping[n].diff(v)(**point) for v in CHART_VARS] for n in EXT_VARS]
        scale = r**self.division_exponent
        return tuple(scale * sum(J[i][k] * vals[k] for k in range(3)) for i in range(3))

    def equation_strings(self) -> dict[str, str]:
        return {f"{v}'": str(c) for v, c in zip(self.chart_vars, self.field)}


def chart_field(Xhat: PolyVectorField, w, chart: str, strict: bool = True) -> BlownUpChart:
    """Exact chart vector field, desingularized by the largest admissible power of r.

    With ``strict`` the X0 part and the eps·X1 part must carry the same power
    of r, i.e. the weights must balance the fast and slow terms.
    """
    w = Weights.of(w)
    Xhat = as_extended(Xhat)
    part0, part1 = split_eps(Xhat)
    comps0 = _chart_components(part0, w, chart)
    comps1 = _chart_components(part1, w, chart)
    total = [a + b for a, b in zip(comps0, comps1)]
    names = tuple(f"{v}'" for v in CHART_VARS)
    m0 = min(c.valuation for c in comps0)
    m1 = min(c.valuation for c in comps1)
    m = min(c.valuation for c in total)
    if m == float("inf"):
        raise BlowupError("the extended field vanishes identically")
    if m < 1:
        worst = min(range(3), key=lambda i: total[i].valuation)
        raise BlowupError(
            f"weights {w.as_tuple()} give r-power {total[worst].valuation} < 1 in component {names[worst]} "
            f"of chart {chart}; the point is not blown up to a singularity",
            names[worst],
        )
    if strict and m0 != float("inf") and m1 != float("inf") and m0 != m1:
        worst = min(range(3), key=lambda i: min(comps0[i].valuation, comps1[i].valuation))
        raise BlowupError(
            f"weights {w.as_tuple()} do not balance chart {chart}: X0 part has r-power {m0}, "
            f"eps·X1 part has r-power {m1} (component {names[worst]}); dividing by r^{min(m0, m1)} "
            f"leaves the other part with a positive r-power",
            names[worst],
        )
    field = PolyVectorField(tuple(c.divided(m) for c in total))
    mapping, _, _ = _chart_map(w, chart)
    return BlownUpChart(chart, w, field, int(m), mapping, (m0, m1))


def all_charts(Xhat: PolyVectorField, w, strict: bool = True) -> dict[str, BlownUpChart]:
    return {c: chart_field(Xhat, w, c, strict) for c in CHARTS}
