"""Hand-written deterministic SVG: phase plane panel and blown-up hemisphere disk."""
from __future__ import annotations

import math
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from ..stratify import PLANAR, Box, CriticalSet

SIZE = 360
PAD = 30
COLORS = ("#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
CANARD = "#d62728"


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Panel:
    """Affine map from a data box onto a square pixel panel at (ox, oy)."""

    def __init__(self, box: tuple[float, float, float, float], ox: float = 0.0):
        self.xmin, self.xmax, self.ymin, self.ymax = box
        self.ox = ox

    def px(self, x: float, y: float) -> tuple[str, str]:
        u = self.ox + PAD + (x - self.xmin) / (self.xmax - self.xmin) * (SIZE - 2 * PAD)
        v = PAD + (self.ymax - y) / (self.ymax - self.ymin) * (SIZE - 2 * PAD)
        return _f(u), _f(v)


def _axes(p: _Panel, title: str) -> list[str]:
    out = [
        f'<rect x="{_f(p.ox + PAD)}" y="{PAD}" width="{SIZE - 2 * PAD}" height="{SIZE - 2 * PAD}" '
        'fill="none" stroke="#444" stroke-width="1"/>'
    ]
    if p.xmin < 0 < p.xmax:
        a, b = p.px(0, p.ymin), p.px(0, p.ymax)
        out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="#bbb" stroke-width="0.5"/>')
    if p.ymin < 0 < p.ymax:
        a, b = p.px(p.xmin, 0), p.px(p.xmax, 0)
        out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="#bbb" stroke-width="0.5"/>')
    out.append(f'<text x="{_f(p.ox + PAD)}" y="{PAD - 10}" font-size="12" font-family="sans-serif">{escape(title)}</text>')
    return out


def _curve_points(poly, box: tuple[float, float, float, float], n: int = 240) -> list[tuple[float, float]]:
    """Real points of poly = 0 in the box, by solving along x- and y-slices."""
    xmin, xmax, ymin, ymax = box
    pts = []
    for k, (lo, hi, olo, ohi) in enumerate(((xmin, xmax, ymin, ymax), (ymin, ymax, xmin, xmax))):
        var, other = PLANAR[k], PLANAR[1 - k]
        for s in np.linspace(lo, hi, n):
            coeffs = _slice_coeffs(poly, var, other, float(s))
            while coeffs and abs(coeffs[-1]) < 1e-14:
                coeffs.pop()
            if len(coeffs) < 2:
                continue
            for r in np.roots(coeffs[::-1]):
                if abs(r.imag) < 1e-9 and olo <= r.real <= ohi:
                    pts.append((float(s), float(r.real)) if k == 0 else (float(r.real), float(s)))
    return sorted(set((round(x, 6), round(y, 6)) for x, y in pts))


def _slice_coeffs(poly, var: str, other: str, value: float) -> list[float]:
    iv, io = poly.variables.index(var), poly.variables.index(other)
    coeffs: dict[int, float] = {}
    for exp, c in poly.terms.items():
        coeffs[exp[io]] = coeffs.get(exp[io], 0.0) + float(c) * value ** exp[iv]
    top = max(coeffs) if coeffs else -1
    return [coeffs.get(i, 0.0) for i in range(top + 1)]


def _dots(p: _Panel, pts: Iterable[tuple[float, float]], color: str, width: float) -> str:
    d = " ".join(f"M{u},{v}h0" for u, v in (p.px(x, y) for x, y in pts))
    return f'<path d="{d}" stroke="{color}" stroke-width="{width}" stroke-linecap="round" fill="none"/>'


def _polyline(p: _Panel, pts: Sequence[Sequence[float]], color: str, width: float = 1.2) -> str:
    coords = " ".join(",".join(p.px(float(x), float(y))) for x, y in pts)
    return f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def _arrows(p: _Panel, cs: CriticalSet, box, n: int = 9) -> list[str]:
    gx, gy = (c.compile(PLANAR) for c in cs.fast_cofactor)
    F = cs.common_poly.compile(PLANAR)
    xmin, xmax, ymin, ymax = box
    L = 0.35 * min(xmax - xmin, ymax - ymin) / n
    out = []
    for x in np.linspace(xmin, xmax, n + 2)[1:-1]:
        for y in np.linspace(ymin, ymax, n + 2)[1:-1]:
            vx, vy = float(gx(x, y)), float(gy(x, y))
            s = float(F(x, y))
            norm = math.hypot(vx, vy)
            if norm == 0 or s == 0:
                continue
            vx, vy = vx / norm * L * np.sign(s), vy / norm * L * np.sign(s)
            a, b = p.px(x - vx, y - vy), p.px(x + vx, y + vy)
            out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="#999" '
                       'stroke-width="0.8" marker-end="url(#arrow)"/>')
    return out


def _header(width: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SIZE}" viewBox="0 0 {width} {SIZE}">',
        '<defs><marker id="arrow" viewBox="0 0 6 6" refX="5" refY="3" markerWidth="5" markerHeight="5" '
        'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#999"/></marker></defs>',
        f'<rect width="{width}" height="{SIZE}" fill="white"/>',
    ]


def plane_svg(
    cs: CriticalSet | None = None,
    box: Box | None = None,
    canard_ids: Sequence[int] = (),
    trajectories: dict | None = None,
    singular_points: Sequence = (),
    title: str = "phase plane",
) -> str:
    box_f = tuple(float(v) for v in (box or Box.default()).as_tuple())
    p = _Panel(box_f)
    body = _header(SIZE) + _axes(p, title)
    if cs is not None and cs.singular:
        body += _arrows(p, cs, box_f)
        for i, b in enumerate(cs.branches):
            color = CANARD if b.id in canard_ids else COLORS[i % len(COLORS)]
            width = 3.0 if b.id in canard_ids else 1.6
            pts = _curve_points(b.defining_poly, box_f)
            if pts:
                body.append(_dots(p, pts, color, width))
    for name, traj in sorted((trajectories or {}).items()):
        if len(traj) < 2:
            continue
        st = np.asarray(traj.states)
        if len(st) > 2000:
            st = st[:: max(1, len(st) // 2000)]
        color = "#000" if name == "aligned" else "#ff7f0e"
        body.append(_polyline(p, st, color))
    for sp in singular_points:
        u, v = p.px(*sp.as_float())
        body.append(f'<circle cx="{u}" cy="{v}" r="3" fill="black"/>')
    body.append("</svg>")
    return "\n".join(body) + "\n"


def hemisphere_svg(equator=(), orbits: Sequence = (), title: str = "blown-up hemisphere") -> str:
    """Disk view: polar radius φ/(π/2), polar angle θ; the rim is the equator."""
    cx, cy, R = SIZE / 2, SIZE / 2 + 8, SIZE / 2 - PAD
    body = _header(SIZE)
    body.append(f'<text x="{PAD}" y="{PAD - 10}" font-size="12" font-family="sans-serif">{escape(title)}</text>')
    body.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(R)}" fill="none" stroke="#444" stroke-width="1"/>')

    def xy(theta: float, phi: float) -> tuple[str, str]:
        rho = R * phi / (math.pi / 2)
        return _f(cx + rho * math.cos(theta)), _f(cy - rho * math.sin(theta))

    for orb in orbits:
        if len(orb) < 2:
            continue
        pts = orb if len(orb) <= 2000 else orb[:: max(1, len(orb) // 2000)]
        coords = " ".join(",".join(xy(t, f)) for t, f in pts)
        body.append(f'<polyline points="{coords}" fill="none" stroke="{CANARD}" stroke-width="1.4"/>')
    for e in equator:
        u, v = xy(e.theta, e.phi)
        fill = "black" if e.origin_label == "fast-foliation" else ("#1f77b4" if e.branch_ids else "#888")
        body.append(f'<circle cx="{u}" cy="{v}" r="4" fill="{fill}"><title>{escape(e.origin_label)} '
                    f'θ={e.theta:.6f} {escape(e.classification)}</title></circle>')
    body.append("</svg>")
    return "\n".join(body) + "\n"
