"""Report sections assembled from the library; plain dicts ready for serialization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import blowup as bu
from ..canard import AssumptionViolation, FastFrame, detect_singular_canards, tangent_at
from ..dynamics import (
    EulerMap,
    IntegratorConfig,
    Trajectory,
    Tube,
    canard_metric,
    default_tube_radius,
    euler_trajectory,
    integrate_full,
    rotated,
    shadowing_error,
)
from ..stratify import (
    Box,
    CriticalSet,
    EvenMultiplicityError,
    SingularPoint,
    StratifyError,
    build_critical_set,
    find_singular_points,
    half_branch_points,
    identity_stratification,
    relaxed_stratifications,
    whitney_stratify,
)
from ..system import SlowFastSystem


def _num(v):
    return v if isinstance(v, Fraction) else float(v)


def system_section(sys: SlowFastSystem) -> dict:
    return {
        "name": sys.name,
        "X0": list(sys.X0_src),
        "X1": list(sys.X1_src),
        "weights": list(sys.weights) if sys.weights else None,
        "box": [str(v) for v in sys.box.as_tuple()] if sys.box else None,
        "epsilon": sys.epsilon,
        "delta": sys.delta,
    }


@dataclass
class Analysis:
    """Everything the analyze command computes, kept for the other commands."""

    system: SlowFastSystem
    box: Box
    cs: CriticalSet | None = None
    points: list[SingularPoint] = field(default_factory=list)
    reports: list = field(default_factory=list)
    stratifications: list = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    violation: bool = False

    def canard_at_origin(self):
        for rep in self.reports:
            if all(c == 0 for c in rep.singular_point.location):
                return rep
        return None


def run_analysis(sys: SlowFastSystem) -> Analysis:
    box = sys.box or Box.default()
    an = Analysis(sys, box)
    try:
        an.cs = build_critical_set(sys.X0)
    except EvenMultiplicityError as exc:
        an.warnings.append(f"assumption violated: {exc}")
        an.violation = True
        return an
    an.warnings.extend(an.cs.warnings)
    if not an.cs.singular:
        an.stratifications.append(identity_stratification(an.cs))
        return an
    an.points = find_singular_points(an.cs, box)
    frame = FastFrame.from_critical_set(an.cs)
    for p in an.points:
        if not p.pairwise_transversal:
            an.warnings.append(
                f"assumption violated: singular point {_loc_str(p)} is not pairwise transversal"
            )
            an.violation = True
            continue
        try:
            ws = whitney_stratify(an.cs, p, box, an.points)
            an.stratifications.append(ws)
            an.stratifications.extend(relaxed_stratifications(ws))
            rep = detect_singular_canards(sys.X1, an.cs, p, frame, box, an.points)
        except AssumptionViolation as exc:
            an.warnings.append(str(exc))
            an.violation = True
            continue
        except StratifyError as exc:
            an.warnings.append(f"assumption violated: {exc}")
            an.violation = True
            continue
        an.reports.append(rep)
        an.warnings.extend(rep.warnings)
    return an


def _loc_str(p: SingularPoint) -> str:
    return "(" + ", ".join(str(c) if isinstance(c, Fraction) else f"{float(c):.12g}" for c in p.location) + ")"


def critical_set_section(an: Analysis) -> dict:
    if an.cs is None:
        return {"verdict": "rejected", "branches": [], "singular_points": []}
    cs = an.cs
    return {
        "verdict": cs.verdict,
        "common_poly": str(cs.common_poly),
        "fast_cofactor": [str(c) for c in cs.fast_cofactor],
        "rescale_divisor": str(cs.rescale_divisor),
        "standard_form": cs.standard_form,
        "branches": [
            {"id": b.id, "poly": str(b.defining_poly), "multiplicity": b.multiplicity,
             "split_complete": b.split_complete}
            for b in cs.branches
        ],
        "singular_points": [
            {
                "location": [_num(c) for c in p.location],
                "exact": p.exact,
                "incident_branches": list(p.incident_branches),
                "pairwise_transversal": p.pairwise_transversal,
                "determinants": [
                    {"pair": list(pair), "value": _num(v)} for pair, v in p.determinants
                ],
                "self_singular": list(p.self_singular),
            }
            for p in an.points
        ],
    }


def stratification_section(an: Analysis) -> list[dict]:
    out = []
    for st in an.stratifications:
        out.append({
            "kind": st.kind,
            "point": None if st.point is None else [_num(c) for c in st.point.location],
            "smooth_branch": st.smooth_branch,
            "strata": [
                {"tag": s.tag, "dimension": s.dimension, "rank_verified": s.rank_verified}
                for s in st.strata
            ],
        })
    return out


def canard_section(an: Analysis) -> list[dict]:
    out = []
    for rep in an.reports:
        out.append({
            "singular_point": [_num(c) for c in rep.singular_point.location],
            "canard_branches": list(rep.canard_branches),
            "branches": [
                {
                    "branch_id": v.branch_id,
                    "poly": str(v.defining_poly),
                    "tangent": [_num(c) for c in v.tangent_at_ps],
                    "wedge": _num(v.wedge_value),
                    "exact": v.exact,
                    "is_canard": v.is_canard,
                    "orientation": v.orientation_note,
                    "stability": {("+" if k > 0 else "-"): s for k, s in sorted(v.stability.items())},
                    "flow_direction": {("+" if k > 0 else "-"): d for k, d in sorted(v.flow_direction.items())},
                    "reduced_flow_equilibria": [[float(c) for c in e] for e in v.reduced_flow_equilibria_found],
                }
                for v in rep.per_branch
            ],
        })
    return out


def analyze_report(sys: SlowFastSystem) -> tuple[dict, int, Analysis]:
    an = run_analysis(sys)
    doc = {
        "command": "analyze",
        "system": system_section(sys),
        "critical_set": critical_set_section(an),
        "stratifications": stratification_section(an),
        "canard": canard_section(an),
        "warnings": list(dict.fromkeys(an.warnings)),
    }
    return doc, (2 if an.violation else 0), an


# ---------------------------------------------------------------------------
# blow-up


def _side_of_equator_point(theta: float, tangent) -> int:
    tx, ty = float(tangent[0]), float(tangent[1])
    if abs(tx) > 0:
        return 1 if math.cos(theta) * tx > 0 else -1
    return 1 if math.sin(theta) * ty > 0 else -1


def canard_pairs(an: Analysis, eqs) -> list[tuple]:
    """(branch id, start, target) on the equator for each canard branch at the origin.

    The start is the direction of the half-branch the reduced flow enters p_s on.
    """
    rep = an.canard_at_origin()
    if rep is None:
        return []
    pairs = []
    for v in rep.per_branch:
        if not v.is_canard:
            continue
        ends = [e for e in eqs if v.branch_id in e.branch_ids and e.origin_label != "fast-foliation"]
        by_side = {_side_of_equator_point(e.theta, v.tangent_at_ps): e for e in ends}
        incoming = [s for s in (-1, 1) if v.flow_direction.get(s, 0) * s < 0]
        if len(by_side) != 2 or len(incoming) != 1:
            continue
        s = incoming[0]
        pairs.append((v.branch_id, by_side[s], by_side[-s]))
    return pairs


def _eq_dict(e) -> dict:
    return {
        "theta": e.theta,
        "phi": e.phi,
        "classification": e.classification,
        "label": e.origin_label,
        "branch_ids": list(e.branch_ids),
        "eigenvalues": [complex(z) for z in e.eigenvalues],
        "residual": e.residual,
    }


def blowup_report(sys: SlowFastSystem, mode: str) -> tuple[dict, object]:
    """mode: charts | sphere | equator | connect. Raises BlowupError on bad weights."""
    if not sys.weights:
        raise bu.BlowupError("weights are required for the blow-up (system file or --weights)")
    w = bu.Weights.of(sys.weights)
    Xhat = bu.extend_field(sys.X0, sys.X1)
    an = run_analysis(sys)
    charts = bu.all_charts(Xhat, w)
    m = charts["eps"].division_exponent
    section: dict = {
        "weights": list(w.as_tuple()),
        "division_exponent": m,
        "center": [0, 0],
    }
    extras: dict = {"analysis": an}
    if mode == "charts":
        section["charts"] = {
            cid: {"division_exponent": ch.division_exponent, "equations": ch.equation_strings(),
                  "valuations": [ch.valuations[0], ch.valuations[1]]}
            for cid, ch in charts.items()
        }
    if mode in ("sphere", "equator", "connect"):
        branches = [(b.id, b.defining_poly) for b in an.cs.branches] if an.cs else []
        cof = an.cs.fast_cofactor if an.cs else None
        eqs = bu.equator_equilibria(Xhat, w, branches, cof)
        section["equator"] = [_eq_dict(e) for e in eqs]
        extras["equator"] = eqs
        if mode == "sphere":
            th = np.linspace(-math.pi, math.pi, 9)
            ph = np.linspace(math.pi / 16, math.pi / 2, 4)
            T, P = np.meshgrid(th, ph, indexing="ij")
            td, pd = bu.SphereField(Xhat, w).angular(T, P)
            section["sphere_samples"] = [
                {"theta": float(a), "phi": float(b), "theta_dot": float(c), "phi_dot": float(d)}
                for a, b, c, d in zip(T.ravel(), P.ravel(), np.asarray(td).ravel(), np.asarray(pd).ravel())
            ]
            sym = bu.symmetry_check_pitchfork(Xhat, w)
            section["symmetry"] = {
                "axis": math.pi / 2, "holds": sym.ok, "max_deviation": sym.max_deviation,
                "tolerance": sym.tolerance,
            }
        if mode == "connect":
            conns = []
            orbits = []
            for bid, start, target in canard_pairs(an, eqs):
                res = bu.connection_trace(Xhat, w, start, target)
                conns.append({
                    "branch_id": bid,
                    "start_theta": start.theta,
                    "target_theta": target.theta,
                    "connected": res.connected,
                    "method": res.method,
                    "terminal_distance": res.terminal_distance,
                    "matching_gap": res.matching_gap,
                    "arclength": res.arclength,
                    "message": res.message,
                })
                orbits.append(res.orbit)
            section["connections"] = conns
            extras["orbits"] = orbits
    doc = {
        "command": "blowup",
        "system": system_section(sys),
        "blowup": section,
        "warnings": list(dict.fromkeys(an.warnings)),
    }
    return doc, extras


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimOptions:
    q0: tuple[float, float] | None = None
    t_end: float | None = None
    tube: float | None = None
    angles: tuple[float, ...] = (0.1, -0.1, 0.3, -0.3)
    delta_sweep: tuple[float, ...] = ()
    euler: bool = False


def default_start(an: Analysis, offset: float = 1e-4):
    """Midpoint of the incoming half of the first canard branch, nudged by ``offset`` in y."""
    rep = an.canard_at_origin() or (an.reports[0] if an.reports else None)
    if rep is None or not rep.canard_branches:
        return None
    v = rep.verdict(rep.canard_branches[0])
    incoming = [s for s in (-1, 1) if v.flow_direction.get(s, 0) * s < 0]
    side = incoming[0] if incoming else -1
    b = an.cs.branch(v.branch_id)
    pts = half_branch_points(b, rep.singular_point, side, an.box, 40, an.points)
    if not pts:
        return None
    p = rep.singular_point.as_float()
    d = [math.hypot(float(q[0]) - p[0], float(q[1]) - p[1]) for q in pts]
    j = int(np.argmin(np.abs(np.array(d) - d[-1] / 2)))
    return (float(pts[j][0]), float(pts[j][1]) + offset)


def _run(sys, X1, eps, q0, t_end, tube, bound, euler, delta) -> Trajectory:
    if euler:
        P = EulerMap(sys.X0, X1, eps, delta)
        return euler_trajectory(P, q0, int(round(t_end / delta)), bound)
    cfg = IntegratorConfig(epsilon=eps)
    return integrate_full(sys.X0, X1, cfg, q0, t_end, tube, bound)


def simulate_report(sys: SlowFastSystem, opts: SimOptions) -> tuple[dict, int, dict]:
    an = run_analysis(sys)
    eps = sys.epsilon or 1e-3
    delta = sys.delta or 1e-3
    q0 = opts.q0 or default_start(an)
    warnings = list(an.warnings)
    if q0 is None:
        q0 = (0.0, 0.0)
        warnings.append("no canard branch found; starting at the origin")
    t_end = opts.t_end if opts.t_end is not None else 2.0 / eps
    radius = opts.tube or default_tube_radius(eps)
    rep = an.canard_at_origin() or (an.reports[0] if an.reports else None)
    branch = p_s = None
    rep_side = 1
    if rep is not None and rep.canard_branches:
        v = rep.verdict(rep.canard_branches[0])
        branch, p_s = an.cs.branch(v.branch_id), rep.singular_point
        reps = [s for s, lab in v.stability.items() if lab == "repelling"]
        rep_side = reps[0] if reps else -v.flow_direction.get(1, 1)
    tube = Tube(branch, radius, p_s) if branch is not None else None
    bound = an.box
    sim: dict = {
        "epsilon": eps, "delta": delta, "q0": list(q0), "t_end": t_end, "tube_radius": radius,
        "mode": "euler" if opts.euler else "flow",
    }
    exit_code = 0
    trajectories = {}
    if t_end == 0:
        traj = Trajectory(np.empty(0), np.empty((0, 2)))
        sim.update({"steps": 0, "status": "ok", "events": [], "canard_metric": 0.0})
        trajectories["aligned"] = traj
        return {"command": "simulate", "system": system_section(sys), "simulation": sim,
                "warnings": warnings}, 0, trajectories

    traj = _run(sys, sys.X1, eps, q0, t_end, tube, bound, opts.euler, delta)
    trajectories["aligned"] = traj
    if traj.status == "non-finite state":
        exit_code = 1
    sim["steps"] = len(traj)
    sim["status"] = traj.status
    sim["diagnostic"] = traj.diagnostic
    sim["final_state"] = list(map(float, traj.final)) if len(traj) else None
    sim["events"] = [
        {"time": e.time, "kind": e.kind, "point": list(e.point), "speed": e.speed} for e in traj.events
    ]
    if branch is not None:
        m0 = canard_metric(traj, branch, p_s, radius, rep_side)
        sim["canard_branch"] = branch.id
        sim["canard_metric"] = m0
        sweep = []
        for a in opts.angles:
            tr = _run(sys, rotated(sys.X1, a), eps, q0, t_end, tube, bound, opts.euler, delta)
            trajectories[f"rotated {a:g}"] = tr
            if tr.status == "non-finite state":
                exit_code = 1
            sweep.append({"angle": a, "canard_metric": canard_metric(tr, branch, p_s, radius, rep_side),
                          "status": tr.status})
        sim["rotation_sweep"] = sweep
        if sweep:
            worst = max(s["canard_metric"] for s in sweep)
            sim["metric_ratio"] = (m0 / worst) if worst > 0 else (math.inf if m0 > 0 else math.nan)
    if len(opts.delta_sweep) >= 2:
        errs = [shadowing_error(sys.X0, sys.X1, eps, d, q0) for d in opts.delta_sweep]
        sim["shadowing"] = {
            "deltas": list(opts.delta_sweep),
            "max_deviation": errs,
            "ratios": [errs[i] / errs[i + 1] if errs[i + 1] > 0 else math.inf for i in range(len(errs) - 1)],
        }
    doc = {"command": "simulate", "system": system_section(sys), "simulation": sim,
           "warnings": list(dict.fromkeys(warnings))}
    return doc, exit_code, trajectories


# ---------------------------------------------------------------------------
# circle lemma


def circle_report(ks) -> dict:
    rows = []
    for k in ks:
        c = bu.circle_lemma(k)
        rows.append({
            "k": k,
            "division_power": c.division_power,
            "max_deviation": c.max_deviation,
            "equilibria": [
                {"psi": e.psi, "derivative": e.derivative, "classification": e.classification}
                for e in c.equilibria
            ],
            "psi_star": [e.psi for e in c.interior],
        })
    return {"command": "circle-lemma", "circle_lemma": rows, "warnings": []}
