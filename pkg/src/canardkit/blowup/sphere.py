"""The desingularized field on the weighted blow-up sphere.

Sphere points are s = (cosθ sinφ, sinθ sinφ, cosφ) with the hemisphere
cosφ >= 0 corresponding to eps >= 0. The blow-up map is
(x, y, eps) = (r^a_x s_1, r^a_y s_2, r^a_eps s_3) and time is rescaled by r^m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from ..polycore import MultiPoly, PolyVectorField
from .charts import (
    EXT_VARS,
    BlowupError,
    Weights,
    as_extended,
    division_exponent,
    weighted_leading_part,
    weighted_order,
)

R1, R2 = 1e-4, 1e-5
JACOBIAN_TOL = 1e-12
EQUATOR_GRID = 2048
ROOT_TOL = 1e-12


class SphereChartError(BlowupError):
    """The angular coordinates degenerate (pole of the sphere)."""


def sphere_point(theta, phi) -> np.ndarray:
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    return np.stack(np.broadcast_arrays(ct * sp, st * sp, cp), axis=-1)


def angles_of(s: np.ndarray) -> tuple[float, float]:
    s = np.asarray(s, dtype=float)
    s = s / np.linalg.norm(s)
    return float(math.atan2(s[1], s[0])), float(math.acos(max(-1.0, min(1.0, s[2]))))


class SphereField:
    """Numeric evaluator of the blown-up field on the sphere r = 0."""

    def __init__(self, Xhat: PolyVectorField, weights):
        self.Xhat = as_extended(Xhat)
        self.weights = Weights.of(weights)
        self.a = np.array(self.weights.as_tuple(), dtype=float)
        m = division_exponent(self.Xhat, self.weights)
        if m == float("inf"):
            raise BlowupError("the extended field vanishes identically")
        self.m = int(m)
        self._f = [c.compile(EXT_VARS) for c in self.Xhat]
        lead = [
            weighted_leading_part(c, self.weights, a + self.m) if not c.is_zero else c
            for c, a in zip(self.Xhat, self.weights)
        ]
        self.leading = PolyVectorField(tuple(lead))
        self._lead = [c.compile(EXT_VARS) for c in lead]

    # -- the rescaled field g(r, s) = X̂_i(r^a s) / r^(a_i + m) ---------------
    def g(self, r: float, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        ra = r ** self.a
        z = s * ra
        vals = [f(z[..., 0], z[..., 1], z[..., 2]) for f in self._f]
        return np.stack(vals, axis=-1) / (ra * r**self.m)

    def g_richardson(self, s: np.ndarray, r1: float = R1, r2: float = R2) -> np.ndarray:
        return (r1 * self.g(r2, s) - r2 * self.g(r1, s)) / (r1 - r2)

    def g_limit(self, s: np.ndarray) -> np.ndarray:
        """Exact r -> 0 limit: the weighted-leading parts evaluated on s."""
        s = np.asarray(s, dtype=float)
        return np.stack([f(s[..., 0], s[..., 1], s[..., 2]) for f in self._lead], axis=-1)

    def _g(self, s, method: str, r1: float = R1, r2: float = R2):
        if method == "richardson":
            return self.g_richardson(s, r1, r2)
        if method == "limit":
            return self.g_limit(s)
        raise ValueError(f"unknown method {method!r}")

    # -- angular form ----------------------------------------------------------
    def angular(self, theta, phi, method: str = "richardson", r1: float = R1, r2: float = R2):
        """(θ̇, φ̇); arrays broadcast."""
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        s = sphere_point(theta, phi)
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        s_th = np.stack([-st * sp, ct * sp, np.zeros_like(st)], axis=-1)
        s_ph = np.stack([ct * cp, st * cp, -sp], axis=-1)
        w = s * self.a
        M = np.stack([w, s_th, s_ph], axis=-1)
        det = np.linalg.det(M)
        if np.any(np.abs(det) < JACOBIAN_TOL):
            bad = np.argmin(np.abs(det))
            raise SphereChartError(
                f"angular coordinates degenerate at θ={theta.flat[bad]:.6g}, φ={phi.flat[bad]:.6g} (pole)"
            )
        rhs = self._g(s, method, r1, r2)
        sol = np.linalg.solve(M, rhs[..., None])[..., 0]
        return sol[..., 1], sol[..., 2]

    # -- embedded form ---------------------------------------------------------
    def embedded(self, s: np.ndarray, method: str = "limit") -> np.ndarray:
        """ṡ = g - ((g·s)/(w·s)) w with w = a ∘ s; regular at the poles."""
        s = np.asarray(s, dtype=float)
        g = self._g(s, method)
        w = s * self.a
        rho = np.sum(g * s, axis=-1) / np.sum(w * s, axis=-1)
        return g - rho[..., None] * w


def sphere_field(Xhat: PolyVectorField, w, theta, phi, r1: float = R1, r2: float = R2):
    """Desingularized (θ̇, φ̇) on the blow-up sphere, extrapolated to r = 0."""
    return SphereField(Xhat, w).angular(theta, phi, "richardson", r1, r2)


# ---------------------------------------------------------------------------
# equator equilibria


@dataclass(frozen=True)
class SphereEquilibrium:
    theta: float
    phi: float
    eigenvalues: tuple[complex, complex]
    classification: str
    origin_label: str
    branch_ids: tuple[int, ...] = ()
    residual: float = 0.0

    @property
    def point(self) -> np.ndarray:
        return sphere_point(self.theta, self.phi)


def classify(eigs: Sequence[complex], tol: float = 1e-7) -> str:
    re = [e.real for e in eigs]
    if any(abs(v) < tol for v in re):
        return "nonhyperbolic"
    complex_pair = any(abs(e.imag) > tol for e in eigs)
    if all(v < 0 for v in re):
        return "sink" if complex_pair else "stable node"
    if all(v > 0 for v in re):
        return "source" if complex_pair else "unstable node"
    return "saddle"


def linearization(sf: SphereField, theta: float, phi: float, h: float = 1e-6, method: str = "limit"):
    def F(t, p):
        a, b = sf.angular(t, p, method)
        return np.array([float(a), float(b)])

    J = np.empty((2, 2))
    J[:, 0] = (F(theta + h, phi) - F(theta - h, phi)) / (2 * h)
    J[:, 1] = (F(theta, phi + h) - F(theta, phi - h)) / (2 * h)
    return J


def _wrap(theta: float) -> float:
    t = (theta + math.pi) % (2 * math.pi) - math.pi
    return t


def _equator_label(theta: float, w: Weights, branch_polys, cofactor, tol: float = 1e-8):
    c, s = math.cos(theta), math.sin(theta)
    pt = {"x": c, "y": s}
    hits = []
    for bid, f in branch_polys:
        lead = weighted_leading_part(f, (w.a_x, w.a_y))
        if abs(float(lead(**pt))) < tol:
            hits.append(bid)
    fast = False
    if cofactor is not None:
        gx, gy = cofactor
        X = MultiPoly.var(gx.variables, "x")
        Y = MultiPoly.var(gx.variables, "y")
        radial = gx * Y * w.a_y - gy * X * w.a_x
        if not radial.is_zero:
            lead = weighted_leading_part(radial, (w.a_x, w.a_y))
            fast = abs(float(lead(**pt))) < tol
    if fast:
        return "fast-foliation", tuple(hits)
    if hits:
        return "branch " + ",".join(str(h) for h in hits), tuple(hits)
    return "interior", ()


def equator_equilibria(
    Xhat: PolyVectorField,
    w,
    branches: Sequence = (),
    cofactor=None,
    grid: int = EQUATOR_GRID,
) -> list[SphereEquilibrium]:
    """Roots of θ̇ on φ = π/2 with labels and angular linearization.

    ``branches`` is a sequence of (id, planar defining poly); ``cofactor`` the
    fast generator, used to label the fast-foliation directions.
    """
    sf = SphereField(Xhat, w)
    half = math.pi / 2

    def f(t):
        return float(sf.angular(t, half, "limit")[0])

    # offset grid so that no scan point sits on the symmetric angles 0, ±π/2, π
    h = 2 * math.pi / grid
    thetas = -math.pi + h * (np.arange(grid + 1) + 0.5)
    vals = np.array(sf.angular(thetas, np.full_like(thetas, half), "limit")[0], dtype=float)
    roots: list[float] = []
    for i in range(grid):
        a, b = thetas[i], thetas[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(f, a, b, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps))

    # double roots do not change sign; they are sign changes of the derivative
    def df(t, d=1e-6):
        return (f(t + d) - f(t - d)) / (2 * d)

    absv = np.abs(vals)
    for i in range(1, grid):
        if not (absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1]):
            continue
        a, b = thetas[i - 1], thetas[i + 1]
        da, db = df(a), df(b)
        if da * db >= 0:
            continue
        t = brentq(df, a, b, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps)
        if abs(f(t)) < 1e-10:
            roots.append(t)
    roots = sorted(_wrap(t) for t in roots)
    merged: list[float] = []
    for t in roots:
        if merged and abs(t - merged[-1]) < 1e-7:
            continue
        if merged and abs(t - merged[0] - 2 * math.pi) < 1e-7:
            continue
        merged.append(t)
    polys = [(bid, p) for bid, p in branches]
    out = []
    for t in merged:
        J = linearization(sf, t, half)
        eigs = tuple(complex(e) for e in np.linalg.eigvals(J))
        label, hits = _equator_label(t, sf.weights, polys, cofactor)
        out.append(SphereEquilibrium(t, half, eigs, classify(eigs), label, hits, abs(f(t))))
    return out


def nearest(eqs: Sequence[SphereEquilibrium], theta: float) -> SphereEquilibrium:
    return min(eqs, key=lambda e: abs(_wrap(e.theta - theta)))


# ---------------------------------------------------------------------------
# connections


@dataclass(frozen=True)
class ConnectionResult:
    connected: bool
    orbit: tuple[tuple[float, float], ...]
    terminal_distance: float
    arclength: float
    method: str = "forward"
    matching_gap: float | None = None
    message: str = ""


def _great_circle(a: np.ndarray, b: np.ndarray) -> float:
    return float(math.acos(max(-1.0, min(1.0, float(a @ b)))))


def _integrate(sf: SphereField, s0, sign: float, events, budget: float, max_time: float):
    def rhs(_, y):
        s = y[:3] / np.linalg.norm(y[:3])
        ds = sign * sf.embedded(s)
        return np.concatenate([ds, [np.linalg.norm(ds)]])

    def out_of_budget(_, y):
        return budget - y[3]

    out_of_budget.terminal = True

    def left_hemisphere(_, y):
        return y[2] / np.linalg.norm(y[:3]) + 1e-9

    left_hemisphere.terminal = True
    left_hemisphere.direction = -1

    sol = solve_ivp(
        rhs, (0.0, max_time), np.concatenate([s0, [0.0]]), method="DOP853",
        rtol=1e-10, atol=1e-12, events=(*events, out_of_budget, left_hemisphere),
    )
    S = sol.y[:3].T / np.linalg.norm(sol.y[:3].T, axis=1)[:, None]
    return sol, S


def connection_trace(
    Xhat: PolyVectorField,
    w,
    start: SphereEquilibrium,
    target: SphereEquilibrium,
    offset: float = 1e-3,
    radius: float = 1e-2,
    budget: float = 1e3,
    max_time: float = 1e4,
) -> ConnectionResult:
    """Look for an orbit from ``start`` to ``target`` through the eps > 0 hemisphere.

    The start point is pushed ``offset`` off the equator and integrated on the
    embedded sphere (regular at the pole). The connection is found when the
    orbit comes within ``radius`` (great-circle distance) of ``target``.

    A target that repels along the equator is reached in forward time only by
    a single orbit, which rounding errors cannot follow. When the forward run
    misses, a two-sided shot is made: the target, pushed off the equator the
    same way, is integrated backwards, both orbits are stopped on the great
    circle bisecting start and target, and the crossing points are compared.
    """
    sf = SphereField(Xhat, w)
    s0 = sphere_point(start.theta, start.phi - offset)
    s1 = sphere_point(target.theta, target.phi - offset)
    tgt = sphere_point(target.theta, target.phi)

    def dist_to_target(y):
        return _great_circle(y[:3] / np.linalg.norm(y[:3]), tgt)

    def hit(_, y):
        return dist_to_target(y) - radius

    hit.direction = -1

    def deep(_, y):
        return dist_to_target(y) - radius / 10

    deep.terminal = True

    def closest(_, y):
        # rate of approach; only armed once inside the radius
        if dist_to_target(y) >= radius:
            return 1.0
        s = y[:3] / np.linalg.norm(y[:3])
        return float(sf.embedded(s) @ tgt)

    closest.terminal = True
    closest.direction = -1
    sol, S = _integrate(sf, s0, 1.0, (hit, deep, closest), budget, max_time)
    dist = _great_circle(S[-1], tgt)
    if len(sol.t_events[0]) and dist < radius:
        return ConnectionResult(
            True, tuple(angles_of(s) for s in S), dist, float(sol.y[3, -1]), "forward", None,
            "reached target neighbourhood",
        )
    forward_msg = (
        "arclength budget exhausted" if len(sol.t_events[3])
        else "orbit left the eps >= 0 hemisphere" if len(sol.t_events[4])
        else "forward orbit did not reach the target" if sol.status == 0
        else sol.message
    )

    normal = sphere_point(start.theta, start.phi) - tgt
    normal /= np.linalg.norm(normal)

    def section(_, y):
        return float(normal @ y[:3])

    section.terminal = True
    fw, Sf = _integrate(sf, s0, 1.0, (section,), budget, max_time)
    bw, Sb = _integrate(sf, s1, -1.0, (section,), budget, max_time)
    if not (len(fw.t_events[0]) and len(bw.t_events[0])):
        return ConnectionResult(
            False, tuple(angles_of(s) for s in S), dist, float(sol.y[3, -1]), "forward", None,
            forward_msg + "; two-sided shot did not reach the bisecting section",
        )
    gap = _great_circle(Sf[-1], Sb[-1])
    joined = np.vstack([Sf, Sb[::-1]])
    arclength = float(fw.y[3, -1] + bw.y[3, -1])
    connected = gap < radius and arclength <= budget
    end_dist = _great_circle(joined[-1], tgt)
    return ConnectionResult(
        connected, tuple(angles_of(s) for s in joined), end_dist, arclength, "two-sided", gap,
        f"{forward_msg}; two-sided matching gap {gap:.3e}",
    )


# ---------------------------------------------------------------------------
# reflection symmetry about a meridian


@dataclass(frozen=True)
class SymmetryResult:
    ok: bool
    max_deviation: float
    worst_point: tuple[float, float]
    tolerance: float

    def __bool__(self) -> bool:
        return self.ok


def symmetry_grid(n: int = 32) -> tuple[np.ndarray, np.ndarray]:
    theta = -math.pi + 2 * math.pi * (np.arange(n) + 0.5) / n
    phi = (np.arange(n) + 1) * math.pi / (2 * n)
    return theta, phi


def symmetry_check_pitchfork(
    Xhat: PolyVectorField, w, axis: float = math.pi / 2, n: int = 32, tol: float = 1e-6
) -> SymmetryResult:
    """Check θ̇(2a-θ, φ) = θ̇(θ, φ) and φ̇(2a-θ, φ) = -φ̇(θ, φ) on an n×n grid.

    Around the meridian θ = a this is the reversing symmetry that maps integral
    curves to mirrored integral curves traversed backwards in time.
    """
    sf = SphereField(Xhat, w)
    th, ph = symmetry_grid(n)
    T, P = np.meshgrid(th, ph, indexing="ij")
    td, pd = sf.angular(T, P)
    tdr, pdr = sf.angular(2 * axis - T, P)
    dev = np.maximum(np.abs(tdr - td), np.abs(pdr + pd))
    k = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[k])
    return SymmetryResult(worst < tol, worst, (float(T[k]), float(P[k])), tol)
