"""Reproduction checks on the two reference systems (built-in, overridable fixtures)."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .. import blowup as bu
from .. import reference as ref
from ..polycore import parse_poly, squarefree_factor
from ..stratify import PLANAR
from ..system import PITCHFORK, TRANSCRITICAL, SlowFastSystem
from .report import canard_pairs, run_analysis


@dataclass(frozen=True)
class Check:
    id: str
    name: str
    passed: bool
    detail: str


def _guard(cid: str, name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(cid, name, bool(ok), detail)


def _same_curve(p, q) -> bool:
    """Equal up to a nonzero rational factor."""
    a, b = p.terms, q.terms
    if set(a) != set(b):
        return False
    k = next(iter(a))
    r = a[k] / b[k]
    return all(a[e] == r * b[e] for e in a)


def _canard_check(sys: SlowFastSystem, expected: str) -> tuple[bool, str]:
    an = run_analysis(sys)
    rep = an.canard_at_origin()
    if rep is None:
        return False, "no transversal singular point at the origin; " + "; ".join(an.warnings)
    target = parse_poly(expected, PLANAR)
    zero = [v for v in rep.per_branch if v.is_canard]
    others_exact = all(v.exact and v.wedge_value != 0 for v in rep.per_branch if not v.is_canard)
    values = ", ".join(f"{v.defining_poly}: {v.wedge_value}" for v in rep.per_branch)
    ok = len(zero) == 1 and _same_curve(zero[0].defining_poly, target) and zero[0].exact and others_exact
    return ok, f"wedge values {values}"


def _equator_match(sys, w, oracle) -> tuple[bool, float]:
    sf = bu.SphereField(bu.extend_field(sys.X0, sys.X1), w)
    th = -math.pi + 2 * math.pi * (np.arange(100) + 0.5) / 100
    td, pd = sf.angular(th, np.full_like(th, math.pi / 2))
    err = float(max(np.max(np.abs(td - oracle(th))), np.max(np.abs(pd))))
    return err < 1e-6, err


def _angles_match(found, expected, tol=1e-9) -> tuple[bool, float]:
    def gap(a, b):
        d = abs(a - b) % (2 * math.pi)
        return min(d, 2 * math.pi - d)

    worst = max(min(gap(e, f) for f in found) for e in expected) if found else math.inf
    return len(found) == len(expected) and worst < tol, worst


def _chart_exact(sys, w, n: int = 100, seed: int = 7) -> tuple[bool, str]:
    Xhat = bu.extend_field(sys.X0, sys.X1)
    rng = random.Random(seed)
    ms = set()
    for cid in bu.CHARTS:
        ch = bu.chart_field(Xhat, w, cid)
        ms.add(ch.division_exponent)
        for _ in range(n):
            pt = {v: Fraction(rng.randint(-40, 40), rng.randint(1, 17)) for v in bu.CHART_VARS}
            amb = dict(zip(bu.EXT_VARS, ch.blowup_map(pt)))
            want = tuple(c(**amb) for c in Xhat)
            if ch.pushforward(pt) != want:
                return False, f"chart {cid} mismatch at {pt}"
    return ms == {3}, f"division exponents {sorted(ms)}"


def run_checks(transcritical: SlowFastSystem = TRANSCRITICAL, pitchfork: SlowFastSystem = PITCHFORK) -> list[Check]:
    T, P = transcritical, pitchfork
    wT, wP = bu.Weights.of(T.weights or (1, 1, 4)), bu.Weights.of(P.weights or (1, 2, 4))
    checks: list[Check] = []

    def factors():
        fl = squarefree_factor(T.X0[0])
        ok = len(fl) == 4 and all(m == 1 and f.degree() == 1 for f, m in fl)
        return ok, ", ".join(f"({f})^{m}" for f, m in fl)

    checks.append(_guard("T-factor", "transcritical X0 splits into four simple lines", factors))
    checks.append(_guard("T-canard", "transcritical: only y - x/2 has zero wedge",
                         lambda: _canard_check(T, "y - x/2")))
    checks.append(_guard("P-canard", "pitchfork: only y - x^2 has zero wedge",
                         lambda: _canard_check(P, "y - x^2")))

    def eq_fields():
        a, ea = _equator_match(T, wT, ref.transcritical_equator)
        b, eb = _equator_match(P, wP, ref.pitchfork_equator)
        return a and b, f"max error transcritical {ea:.2e}, pitchfork {eb:.2e}"

    checks.append(_guard("equator-field", "equator fields match the closed forms", eq_fields))

    def sphere_fields():
        th = -math.pi + 2 * math.pi * (np.arange(40) + 0.5) / 40
        ph = np.linspace(0.1, math.pi / 2, 20)
        TT, PP = np.meshgrid(th, ph)
        worst = 0.0
        for sys, w, oracle in ((T, wT, ref.transcritical_sphere), (P, wP, ref.pitchfork_sphere)):
            got = bu.SphereField(bu.extend_field(sys.X0, sys.X1), w).angular(TT, PP)
            want = oracle(TT, PP)
            worst = max(worst, float(np.max(np.abs(np.asarray(got) - np.asarray(want)))))
        return worst < 1e-6, f"max error {worst:.2e}"

    checks.append(_guard("sphere-field", "hemisphere fields match the closed forms", sphere_fields))

    def t_angles():
        eqs = bu.equator_equilibria(bu.extend_field(T.X0, T.X1), wT)
        ok, worst = _angles_match([e.theta for e in eqs], ref.TRANSCRITICAL_EQUATOR_ANGLES)
        return ok, f"{len(eqs)} equilibria, worst angle error {worst:.1e}"

    checks.append(_guard("T-equator", "transcritical: ten equator equilibria", t_angles))

    def p_angles():
        eqs = bu.equator_equilibria(bu.extend_field(P.X0, P.X1), wP)
        ok, worst = _angles_match([e.theta for e in eqs], ref.PITCHFORK_EQUATOR_ANGLES)
        star = min((e.theta for e in eqs), key=lambda t: abs(t - ref.PITCHFORK_THETA_STAR))
        return ok, (
            f"{len(eqs)} equilibria, worst angle error {worst:.1e}; interior root {star:.10f} = arcsin(1/φ), "
            f"while arctan(1/φ) = {ref.PITCHFORK_PRINTED_LABEL:.10f} is not a root "
            f"(θ̇ there = {float(ref.pitchfork_equator(ref.PITCHFORK_PRINTED_LABEL)):.3e})"
        )

    checks.append(_guard("P-equator", "pitchfork: equator equilibria incl. sinθ = cos²θ roots", p_angles))

    def meridian():
        sf = bu.SphereField(bu.extend_field(T.X0, T.X1), wT)
        ph = np.linspace(math.pi / 100, math.pi / 2, 50)
        td, _ = sf.angular(np.full_like(ph, -math.pi + ref.ARCTAN_HALF), ph)
        worst = float(np.max(np.abs(td)))
        return worst < 1e-6, f"max |θ̇| {worst:.2e}"

    checks.append(_guard("T-meridian", "transcritical: invariant meridian θ = -π + arctan(1/2)", meridian))

    def connections():
        parts, ok = [], True
        for sys, w, start, target in (
            (T, wT, -math.pi + ref.ARCTAN_HALF, ref.ARCTAN_HALF),
            (P, wP, ref.PITCHFORK_THETA_STAR, math.pi - ref.PITCHFORK_THETA_STAR),
        ):
            an = run_analysis(sys)
            Xhat = bu.extend_field(sys.X0, sys.X1)
            eqs = bu.equator_equilibria(Xhat, w, [(b.id, b.defining_poly) for b in an.cs.branches],
                                        an.cs.fast_cofactor)
            pairs = canard_pairs(an, eqs)
            if len(pairs) != 1:
                ok = False
                parts.append(f"{sys.name}: {len(pairs)} canard pairs on the equator")
                continue
            _, s, t = pairs[0]
            if abs(s.theta - start) > 1e-9 or abs(t.theta - target) > 1e-9:
                ok = False
            res = bu.connection_trace(Xhat, w, s, t)
            ok = ok and res.connected and res.terminal_distance < 1e-2
            parts.append(f"{sys.name}: {s.theta:.6f} -> {t.theta:.6f} {res.method} "
                         f"connected={res.connected} distance={res.terminal_distance:.2e}")
        return ok, "; ".join(parts)

    checks.append(_guard("connections", "attracting-to-repelling connections on the sphere", connections))

    def symmetry():
        r = bu.symmetry_check_pitchfork(bu.extend_field(P.X0, P.X1), wP)
        return r.ok, f"max deviation {r.max_deviation:.2e} on 32x32 grid"

    checks.append(_guard("P-symmetry", "pitchfork: reflection symmetry about θ = π/2", symmetry))

    def circle():
        parts, ok = [], True
        for k in range(1, 5):
            c = bu.circle_lemma(k)
            cls = [e.classification for e in c.equilibria]
            good = (
                c.max_deviation < 1e-12 and len(c.equilibria) == 3
                and cls[0] == "stable" and cls[2] == "stable" and cls[1] == "source"
            )
            ok = ok and good
            parts.append(f"k={k}: ψ*={c.equilibria[1].psi:.6f} dev={c.max_deviation:.1e}")
        return ok, "; ".join(parts)

    checks.append(_guard("circle", "circle dynamics k = 1..4: {0, π} stable, ψ* source", circle))

    def charts():
        a, da = _chart_exact(T, wT)
        b, db = _chart_exact(P, wP)
        return a and b, f"transcritical {da}; pitchfork {db}"

    checks.append(_guard("charts", "chart pushforward exact, m = 3", charts))
    return checks


def verify_report(checks: list[Check]) -> dict:
    return {
        "command": "verify-paper",
        "checks": [{"id": c.id, "name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
        "warnings": [],
    }


def format_table(checks: list[Check]) -> str:
    width = max(len(c.id) for c in checks)
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.id:<{width}}  {c.name}\n      {c.detail}" for c in checks]
    n = sum(c.passed for c in checks)
    lines.append(f"{n}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
