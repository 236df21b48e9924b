"""Circle dynamics of the odd-power model ẋ = x^(2k+1) ± ε after a weighted polar blow-up."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..polycore import MultiPoly, parse_poly, substitute

SCAN_STEP = 1e-4


@dataclass(frozen=True)
class CircleEquilibrium:
    psi: float
    derivative: float
    classification: str  # stable | source | nonhyperbolic

    @property
    def hyperbolic(self) -> bool:
        return self.classification != "nonhyperbolic"


@dataclass(frozen=True)
class CircleLemmaSystem:
    k: int
    sign: int
    psi_dot: Callable  # closed form
    psi_dot_derived: Callable  # chart pushforward
    division_power: int
    equilibria: tuple[CircleEquilibrium, ...]
    max_deviation: float

    @property
    def interior(self) -> tuple[CircleEquilibrium, ...]:
        return tuple(e for e in self.equilibria if 0 < e.psi < math.pi)


def closed_form(k: int, sign: int = 1) -> Callable:
    def f(psi):
        psi = np.asarray(psi, dtype=float)
        s, c = np.sin(psi), np.cos(psi)
        return (2 * k + 1) * s * (c ** (2 * k + 1) + sign * s) / (k * np.cos(2 * psi) - k - 1)

    return f


def derived_form(k: int, sign: int = 1) -> tuple[Callable, int]:
    """ψ̇ from pushing ẋ = x^(2k+1) + sign·ε, ε̇ = 0 through x = r c, ε = r^(2k+1) s.

    Inverting the Jacobian of (r, ψ) ↦ (r c, r^b s) gives
    ψ̇ = (a r^(a-1) c ε̇ - b r^(b-1) s ẋ) / (r^(a+b-1) (a c² + b s²)) with a = 1,
    b = 2k+1. The r-power left after the division is removed (desingularization)
    and r is set to 0. Returns the callable and that r-power.
    """
    a, b = 1, 2 * k + 1
    amb = ("x", "eps")
    xdot = parse_poly(f"x^{b} + {sign}*eps" if sign else f"x^{b}", amb)
    edot = MultiPoly.zero(amb)
    vs = ("r", "c", "s")
    r, c, s = (MultiPoly.var(vs, v) for v in vs)
    bind = {"x": r**a * c, "eps": r**b * s}
    X, E = substitute(xdot, bind), substitute(edot, bind)
    num = c * r ** (a - 1) * E * a - s * r ** (b - 1) * X * b
    shift = a + b - 1
    power = int(num.valuation("r")) - shift
    reduced = num.shift_power("r", -(shift + power)).subs({"r": 0, "c": c, "s": s})
    den = c * c * a + s * s * b
    fn, fd = reduced.compile(vs), den.compile(vs)

    def f(psi):
        psi = np.asarray(psi, dtype=float)
        cc, ss = np.cos(psi), np.sin(psi)
        return fn(0.0 * psi, cc, ss) / fd(0.0 * psi, cc, ss)

    return f, power


def _classify(d: float, tol: float = 1e-9) -> str:
    if abs(d) < tol:
        return "nonhyperbolic"
    return "stable" if d < 0 else "source"


def _derivative(f: Callable, psi: float, h: float = 1e-6) -> float:
    return float((f(psi + h) - f(psi - h)) / (2 * h))


def circle_lemma(k: int, sign: int = 1, samples: int = 1000) -> CircleLemmaSystem:
    """Build both forms of ψ̇, compare them and classify the equilibria on [0, π]."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if sign not in (-1, 0, 1):
        raise ValueError("sign must be +1, -1 or 0")
    closed = closed_form(k, sign)
    derived, power = derived_form(k, sign)
    grid = np.linspace(0.0, math.pi, samples)
    deviation = float(np.max(np.abs(closed(grid) - derived(grid))))

    n = int(math.pi / SCAN_STEP)
    psis = SCAN_STEP * np.arange(1, n + 1)
    vals = derived(psis)
    roots = [0.0]
    for i in range(len(psis) - 1):
        if vals[i] == 0:
            roots.append(float(psis[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(lambda t: float(derived(t)), psis[i], psis[i + 1], xtol=1e-15))
    roots.append(math.pi)
    eqs = tuple(CircleEquilibrium(p, _derivative(derived, p), _classify(_derivative(derived, p))) for p in roots)
    return CircleLemmaSystem(k, sign, closed, derived, power, eqs, deviation)
