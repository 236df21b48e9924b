"""Numerical evidence: full slow-fast flow, reduced flow on branches, Euler maps."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, TextIO

import numpy as np
from scipy.integrate import RK45, solve_ivp
from scipy.optimize import brentq

from .canard import FastFrame, project_rho, tangent_at
from .polycore import PolyVectorField
from .stratify import PLANAR, Box, Branch, SingularPoint, planar_field


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 1.0
    max_steps: int = 1_000_000
    epsilon: float = 1e-3

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0 < v <= 1e-2:
                raise DynamicsError(f"{name} must lie in (0, 1e-2], got {v}")
        if not 0 < self.epsilon <= 0.1:
            raise DynamicsError(f"epsilon must lie in (0, 0.1], got {self.epsilon}")
        if not self.max_step > 0 or self.max_steps < 1:
            raise DynamicsError("max_step and max_steps must be positive")


SWITCH_MARGIN = 1 - 1e-6


def default_tube_radius(epsilon: float) -> float:
    return max(10 * math.sqrt(epsilon), 1e-3)


@dataclass(frozen=True)
class Event:
    time: float
    kind: str  # entered tube | left tube | passed p_s | undefined at p_s
    point: tuple[float, float]
    step: int  # index of the first stored state at or after the event
    speed: float | None = None


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 2)
    events: tuple[Event, ...] = ()
    status: str = "ok"  # ok | step underflow | non-finite state | max steps
    diagnostic: str = ""

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


@dataclass(frozen=True)
class Tube:
    """Neighbourhood |F|/|∇F| < radius of one branch, with p_s marked on it."""

    branch: Branch
    radius: float
    p_s: SingularPoint | None = None

    def __post_init__(self):
        f = self.branch.defining_poly.compile(PLANAR)
        gx, gy = (g.compile(PLANAR) for g in self.branch.gradient)
        object.__setattr__(self, "_f", (f, gx, gy))
        if self.p_s is not None:
            t = [float(c) for c in tangent_at(self.branch, self.p_s.location)]
            object.__setattr__(self, "_axis", (self.p_s.as_float(), t))

    def distances(self, xs, ys) -> np.ndarray:
        f, gx, gy = self._f
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        n = np.hypot(gx(xs, ys), gy(xs, ys))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(n > 0, np.abs(f(xs, ys)) / n, np.inf)

    def distance(self, q) -> float:
        return float(self.distances(q[0], q[1]))

    def along(self, q) -> float:
        """Signed position of q along the branch tangent at p_s."""
        if self.p_s is None:
            return 0.0
        p, t = self._axis
        return (float(q[0]) - p[0]) * t[0] + (float(q[1]) - p[1]) * t[1]


def _field(X0: PolyVectorField, X1: PolyVectorField, eps: float) -> Callable:
    X0, X1 = planar_field(X0), planar_field(X1)
    a0, a1 = X0[0].compile(PLANAR), X0[1].compile(PLANAR)
    b0, b1 = X1[0].compile(PLANAR), X1[1].compile(PLANAR)

    def f(_t, q):
        x, y = q
        return np.array([a0(x, y) + eps * b0(x, y), a1(x, y) + eps * b1(x, y)])

    return f


def _refine_root(fn: Callable[[float], float], a: float, b: float) -> float:
    fa, fb = fn(a), fn(b)
    if fa == 0:
        return a
    if fb == 0 or fa * fb > 0:
        return b
    return brentq(fn, a, b, xtol=1e-14, rtol=1e-12)


def integrate_full(
    X0: PolyVectorField,
    X1: PolyVectorField,
    cfg: IntegratorConfig,
    q0,
    t_end: float,
    tube: Tube | None = None,
    bound: Box | None = None,
) -> Trajectory:
    """Dormand–Prince 5(4) integration of X0 + eps X1, one stored row per accepted step.

    With ``bound`` the run stops (status "left box") at the first accepted
    step outside the rectangle.
    """
    if t_end < 0:
        raise DynamicsError("t_end must be non-negative")
    if t_end == 0:
        return Trajectory(np.empty(0), np.empty((0, 2)))
    f = _field(X0, X1, cfg.epsilon)
    y0 = np.array([float(q0[0]), float(q0[1])])
    solver = RK45(f, 0.0, y0, t_end, rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.max_step)
    times, states = [0.0], [y0.copy()]
    events: list[Event] = []
    status, diag = "ok", ""

    def inside(q):
        return tube.distance(q) < tube.radius

    was_inside = inside(y0) if tube else False
    prev_along = tube.along(y0) if tube and tube.p_s else 0.0
    steps = 0
    while solver.status == "running":
        if steps >= cfg.max_steps:
            status, diag = "max steps", f"stopped after {steps} steps at t={solver.t:.6g}"
            break
        t_prev = solver.t
        msg = solver.step()
        steps += 1
        if solver.status == "failed":
            status, diag = "step underflow", msg or "step size underflow"
            break
        q = solver.y
        if not np.all(np.isfinite(q)):
            status, diag = "non-finite state", f"non-finite state at t={solver.t:.6g}"
            break
        times.append(solver.t)
        states.append(q.copy())
        if bound is not None and not bound.contains((Fraction(q[0]), Fraction(q[1]))):
            status, diag = "left box", f"left {tuple(float(v) for v in bound.as_tuple())} at t={solver.t:.6g}"
        if tube is not None:
            dense = solver.dense_output()
            now_inside = inside(q)
            if now_inside != was_inside:
                te = _refine_root(lambda s: tube.distance(dense(s)) - tube.radius, t_prev, solver.t)
                kind = "entered tube" if now_inside else "left tube"
                events.append(Event(te, kind, tuple(float(c) for c in dense(te)), len(times) - 1))
                was_inside = now_inside
            if tube.p_s is not None:
                a = tube.along(q)
                if a * prev_along < 0 or (a == 0 and prev_along != 0):
                    te = _refine_root(lambda s: tube.along(dense(s)), t_prev, solver.t)
                    pt = dense(te)
                    if tube.distance(pt) < tube.radius:
                        speed = float(np.linalg.norm(f(te, pt)))
                        events.append(Event(te, "passed p_s", tuple(float(c) for c in pt), len(times) - 1, speed))
                prev_along = a
        if status == "left box":
            break
    return Trajectory(np.array(times), np.array(states), tuple(events), status, diag)


def rotated(X1: PolyVectorField, angle: float) -> PolyVectorField:
    """R(angle) X1 with the rotation entries taken exactly from their float values."""
    X1 = planar_field(X1)
    c, s = Fraction(math.cos(angle)), Fraction(math.sin(angle))
    return PolyVectorField((X1[0] * c - X1[1] * s, X1[0] * s + X1[1] * c))


# ---------------------------------------------------------------------------
# reduced flow


def _graph_coordinate(branch: Branch, q) -> int:
    gx, gy = (float(g(x=float(q[0]), y=float(q[1]))) for g in branch.gradient)
    # tangent (-gy, gx): larger component picks the graph coordinate
    return 0 if abs(gy) >= abs(gx) else 1


def _lift(branch: Branch, k: int, s: float, guess: float) -> tuple[float, float]:
    """Point of the branch with coordinate k equal to s (Newton from ``guess``)."""
    v = guess
    for _ in range(50):
        q = (s, v) if k == 0 else (v, s)
        fval = float(branch.defining_poly(x=q[0], y=q[1]))
        d = float(branch.gradient[1 - k](x=q[0], y=q[1]))
        if d == 0:
            break
        step = fval / d
        v -= step
        if abs(step) <= 1e-15 * (1 + abs(v)):
            break
    return (s, v) if k == 0 else (v, s)


def integrate_reduced(
    branch: Branch,
    frame: FastFrame,
    X1: PolyVectorField,
    q0,
    s_end: float,
    p_s: SingularPoint | None = None,
    is_canard: bool = False,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> Trajectory:
    """Integrate q' = alpha(q) t(q) along the branch as a graph over x or y.

    The graph coordinate switches when the tangent passes 45°. Reaching p_s
    is allowed only on a canard branch; elsewhere the run stops there with an
    "undefined at p_s" event.
    """
    X1 = planar_field(X1)
    q = (float(q0[0]), float(q0[1]))
    if not branch.contains(q) and abs(float(branch.value(q))) > 1e-9:
        raise DynamicsError(f"start point {q} is not on branch {branch.defining_poly}")
    ps = p_s.as_float() if p_s is not None else None

    def speed_vec(pt, h: float = 1e-6):
        smp = project_rho(X1, pt, branch, frame)
        if smp.well_defined:
            t = tangent_at(branch, pt)
            a = float(smp.tangent_component)
            return a * float(t[0]), a * float(t[1])
        # fast fibre tangent to the branch: accept only a removable singularity
        k = _graph_coordinate(branch, pt)
        sides = []
        for s in (-h, h):
            q = _lift(branch, k, float(pt[k]) + s, float(pt[1 - k]))
            smp = project_rho(X1, q, branch, frame)
            if not smp.well_defined:
                raise DynamicsError(f"reduced flow undefined near {pt}")
            t = tangent_at(branch, q)
            a = float(smp.tangent_component)
            sides.append((a * float(t[0]), a * float(t[1])))
        (ux, uy), (vx, vy) = sides
        if math.hypot(ux - vx, uy - vy) > 1e-4 * max(1.0, math.hypot(ux, uy)):
            raise DynamicsError(f"reduced flow undefined at {pt}")
        return (ux + vx) / 2, (uy + vy) / 2

    times, states, events = [0.0], [q], []
    t0 = 0.0
    status, diag = "ok", ""
    while t0 < s_end:
        k = _graph_coordinate(branch, q)
        other = q[1 - k]

        def pt_of(s, guess=None):
            return _lift(branch, k, s, other if guess is None else guess)

        def rhs(_t, y):
            pt = pt_of(y[0])
            v = speed_vec(pt)
            return [v[k]]

        def switch(_t, y):
            pt = pt_of(y[0])
            gx, gy = (abs(float(g(x=pt[0], y=pt[1]))) for g in branch.gradient)
            # small hysteresis: a branch sitting exactly at 45° never switches
            return (gy - SWITCH_MARGIN * gx) if k == 0 else (gx - SWITCH_MARGIN * gy)

        switch.terminal = True
        switch.direction = -1
        evs = [switch]
        if ps is not None:
            def reach(_t, y):
                return y[0] - ps[k]

            reach.terminal = not is_canard
            evs.append(reach)
        sol = solve_ivp(rhs, (t0, s_end), [q[k]], method="RK45", rtol=rtol, atol=atol, events=evs, dense_output=True)
        for tt, yy in zip(sol.t[1:], sol.y[0, 1:]):
            pt = pt_of(yy)
            other = pt[1 - k]
            times.append(float(tt))
            states.append(pt)
        if ps is not None and len(sol.t_events[1]):
            for te in sol.t_events[1]:
                if te <= t0 + 1e-14:
                    continue
                pt = pt_of(float(sol.sol(te)[0]))
                if not is_canard:
                    events.append(Event(float(te), "undefined at p_s", pt, len(times) - 1))
                    status, diag = "halted", "reduced flow is not a stratified field through p_s on this branch"
                else:
                    v = speed_vec(p_s.location)
                    events.append(Event(float(te), "passed p_s", pt, len(times) - 1, math.hypot(*v)))
            if status == "halted":
                break
        if sol.status == 1 and len(sol.t_events[0]):
            t0 = float(sol.t_events[0][0])
            q = pt_of(float(sol.sol(t0)[0]))
            if times[-1] < t0:
                times.append(t0)
                states.append(q)
            # tiny nudge past the 45° line so the new chart is chosen
            continue
        if sol.status == -1:
            status, diag = "failed", sol.message
        break
    return Trajectory(np.array(times), np.array(states, dtype=float), tuple(events), status, diag)


# ---------------------------------------------------------------------------
# canard metric


def canard_metric(
    traj: Trajectory,
    branch: Branch,
    p_s: SingularPoint,
    tube_radius: float,
    repelling_side: int,
) -> float:
    """Arclength followed inside the tube along the repelling half-branch.

    Counting starts where the trajectory first lies past p_s on the repelling
    side while inside the tube and stops at the first exit from the tube.
    """
    if len(traj) < 2:
        return 0.0
    tube = Tube(branch, tube_radius, p_s)
    xs, ys = traj.states[:, 0], traj.states[:, 1]
    inside = tube.distances(xs, ys) < tube_radius
    p, t = tube._axis
    past = ((xs - p[0]) * t[0] + (ys - p[1]) * t[1]) * repelling_side > 0
    start = np.flatnonzero(inside & past)
    if not len(start):
        return 0.0
    i0 = int(start[0])
    exits = np.flatnonzero(~inside[i0:])
    i1 = i0 + int(exits[0]) if len(exits) else len(xs)
    seg = np.hypot(np.diff(xs[i0:i1]), np.diff(ys[i0:i1]))
    return float(seg.sum())


# ---------------------------------------------------------------------------
# Euler maps


@dataclass(frozen=True)
class EulerMap:
    """P(q) = q + delta (X0 + eps X1)(q)."""

    X0: PolyVectorField
    X1: PolyVectorField
    epsilon: object
    delta: object
    bit_budget: int = 4096

    def __post_init__(self):
        if not self.delta > 0:
            raise DynamicsError("delta must be positive")
        object.__setattr__(self, "X0", planar_field(self.X0))
        object.__setattr__(self, "X1", planar_field(self.X1))

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in (self.epsilon, self.delta))

    def field_at(self, q):
        x, y = q
        return tuple(a(x=x, y=y) + self.epsilon * b(x=x, y=y) for a, b in zip(self.X0, self.X1))

    def __call__(self, q):
        v = self.field_at(q)
        return (q[0] + self.delta * v[0], q[1] + self.delta * v[1])

    def float_step(self) -> Callable:
        a0, a1 = self.X0[0].compile(PLANAR), self.X0[1].compile(PLANAR)
        b0, b1 = self.X1[0].compile(PLANAR), self.X1[1].compile(PLANAR)
        e, d = float(self.epsilon), float(self.delta)

        def step(x, y):
            return x + d * (a0(x, y) + e * b0(x, y)), y + d * (a1(x, y) + e * b1(x, y))

        return step


@dataclass(frozen=True)
class EulerOrbit:
    points: tuple
    exact_steps: int  # iterates computed in rationals
    switched_to_float: bool


def _bits(v: Fraction) -> int:
    return v.numerator.bit_length() + v.denominator.bit_length()


def euler_iterate(P: EulerMap, q0, n: int) -> EulerOrbit:
    """n iterates of P starting at q0 (q0 included); rational until the bit budget is hit."""
    if n < 0:
        raise DynamicsError("n must be non-negative")
    exact = P.exact and all(isinstance(c, (int, Fraction)) for c in q0)
    q = tuple(Fraction(c) for c in q0) if exact else (float(q0[0]), float(q0[1]))
    pts = [q]
    exact_steps = 0
    switched = False
    step = None
    for _ in range(n):
        if exact:
            nq = P(q)
            if max(_bits(nq[0]), _bits(nq[1])) > P.bit_budget:
                exact, switched = False, True
                q = (float(q[0]), float(q[1]))
            else:
                q = nq
                exact_steps += 1
                pts.append(q)
                continue
        if step is None:
            step = P.float_step()
        q = step(*q)
        if not (math.isfinite(q[0]) and math.isfinite(q[1])):
            raise DynamicsError("Euler iteration produced a non-finite state")
        pts.append(q)
    return EulerOrbit(tuple(pts), exact_steps, switched)


def euler_trajectory(P: EulerMap, q0, n: int, bound: Box | None = None) -> Trajectory:
    """Float Euler orbit as a Trajectory with times k delta; stops on leaving ``bound``."""
    step = P.float_step()
    d = float(P.delta)
    x, y = float(q0[0]), float(q0[1])
    pts = [(x, y)]
    status = "ok"
    if bound is not None:
        lo_x, hi_x, lo_y, hi_y = (float(v) for v in bound.as_tuple())
    for _ in range(n):
        x, y = step(x, y)
        if not (math.isfinite(x) and math.isfinite(y)):
            status = "non-finite state"
            break
        pts.append((x, y))
        if bound is not None and not (lo_x <= x <= hi_x and lo_y <= y <= hi_y):
            status = "left box"
            break
    return Trajectory(d * np.arange(len(pts)), np.array(pts), (), status)


def shadowing_error(
    X0: PolyVectorField, X1: PolyVectorField, epsilon: float, delta: float, q0, t_end: float = 1.0
) -> float:
    """Max distance between Euler iterates and the exact flow at t = k delta, k delta <= t_end."""
    n = int(round(t_end / delta))
    P = EulerMap(X0, X1, float(epsilon), float(delta))
    orbit = np.array(euler_iterate(P, (float(q0[0]), float(q0[1])), n).points, dtype=float)
    f = _field(X0, X1, float(epsilon))
    ts = delta * np.arange(n + 1)
    ref = solve_ivp(f, (0.0, ts[-1]), [float(q0[0]), float(q0[1])], method="DOP853",
                    rtol=1e-13, atol=1e-15, t_eval=ts)
    return float(np.max(np.hypot(*(orbit - ref.y.T).T)))


@dataclass(frozen=True)
class MultiplierResult:
    point: tuple
    multipliers: tuple[complex, complex]
    transverse_multiplier: complex
    normally_hyperbolic: bool


def multiplier_check(X0: PolyVectorField, delta: float, points: Sequence, tol: float = 1e-9) -> list[MultiplierResult]:
    """Eigenvalues of Id + delta DX0 on C, ignoring the tangential multiplier 1."""
    X0 = planar_field(X0)
    J = [[c.diff(v) for v in PLANAR] for c in X0]
    out = []
    for p in points:
        x, y = p
        res = max(abs(float(c(x=x, y=y))) for c in X0)
        if res > 1e-10:
            raise DynamicsError(f"point {p} is not on the critical set (residual {res:.3g})")
        Jp = np.array([[float(e(x=x, y=y)) for e in row] for row in J])
        mult = np.linalg.eigvals(np.eye(2) + delta * Jp)
        # DX0 has rank <= 1 on C: drop the multiplier closest to 1 (tangential)
        i = int(np.argmin(np.abs(mult - 1)))
        transverse = complex(mult[1 - i])
        hyperbolic = not (1 - tol <= abs(transverse) <= 1 + tol)
        out.append(MultiplierResult(tuple(p), (complex(mult[0]), complex(mult[1])), transverse, hyperbolic))
    return out


# ---------------------------------------------------------------------------
# CSV


def trajectory_rows(traj: Trajectory) -> list[tuple]:
    tags: dict[int, list[str]] = {}
    for e in traj.events:
        tags.setdefault(e.step, []).append(e.kind)
    return [
        (repr(float(t)), repr(float(q[0])), repr(float(q[1])), ";".join(tags.get(i, [])))
        for i, (t, q) in enumerate(zip(traj.times, traj.states))
    ]


def write_csv(traj: Trajectory, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("t", "x", "y", "event"))
    w.writerows(trajectory_rows(traj))


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_csv(traj, buf)
    return buf.getvalue()
