"""Dense univariate polynomials over Q: Sturm sequences and real-root isolation.

Coefficient lists are ascending (``c[k]`` multiplies ``t**k``) and trimmed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd as igcd, lcm
from typing import Sequence

import numpy as np

from .poly import MultiPoly, PolyError

UPoly = list  # list[Fraction], ascending


def trim(c: Sequence) -> UPoly:
    c = [Fraction(v) for v in c]
    while c and c[-1] == 0:
        c.pop()
    return c


def from_multipoly(p: MultiPoly, var: str) -> UPoly:
    used = p.used_variables()
    if any(v != var for v in used):
        raise PolyError(f"polynomial is not univariate in {var!r}: uses {used}")
    i = p.variables.index(var)
    deg = p.degree_in(var)
    c = [Fraction(0)] * (deg + 1)
    for e, v in p.terms.items():
        c[e[i]] = v
    return trim(c)


def to_multipoly(c: Sequence, variables: Sequence[str], var: str) -> MultiPoly:
    i = tuple(variables).index(var)
    n = len(variables)
    return MultiPoly(variables, {tuple(k if j == i else 0 for j in range(n)): v for k, v in enumerate(c) if v})


def degree(c: UPoly) -> int:
    return len(c) - 1


def evaluate(c: UPoly, t):
    acc = Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
    for v in reversed(c):
        acc = acc * t + (v if isinstance(acc, Fraction) else float(v))
    return acc


def derivative(c: UPoly) -> UPoly:
    return trim([k * c[k] for k in range(1, len(c))])


def mul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def sub(a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def divmod_poly(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lb = b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        f = a[-1] / lb
        q[k] = f
        for i, v in enumerate(b):
            a[i + k] -= f * v
        a = trim(a)
    return trim(q), a


def monic(c: UPoly) -> UPoly:
    return [v / c[-1] for v in c] if c else []


def gcd(a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def squarefree_part(c: UPoly) -> UPoly:
    g = gcd(c, derivative(c))
    if len(g) <= 1:
        return monic(c)
    return monic(divmod_poly(c, g)[0])


def sturm_sequence(c: UPoly) -> list[UPoly]:
    """Sturm chain of the square-free part of ``c``."""
    p0 = squarefree_part(c)
    seq = [p0, derivative(p0)]
    while seq[-1] and len(seq[-1]) > 1:
        r = divmod_poly(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-v for v in r])
    return [s for s in seq if s]


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_variations(seq: list[UPoly], t: Fraction) -> int:
    signs = [_sign(evaluate(s, t)) for s in seq]
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq: list[UPoly], a: Fraction, b: Fraction) -> int:
    """Distinct real roots in the half-open interval (a, b]."""
    return sign_variations(seq, a) - sign_variations(seq, b)


def cauchy_bound(c: UPoly) -> Fraction:
    lead = abs(c[-1])
    return 1 + max((abs(v) / lead for v in c[:-1]), default=Fraction(0))


@dataclass(frozen=True)
class RealRoot:
    """A real root bracketed by ``[lo, hi]``; ``exact`` holds the rational value when known."""

    lo: Fraction
    hi: Fraction
    exact: Fraction | None = None

    @property
    def approx(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


def isolate_real_roots(
    c: UPoly,
    lo: Fraction | None = None,
    hi: Fraction | None = None,
    width: Fraction = Fraction(1, 10**12),
) -> list[RealRoot]:
    """Isolate the distinct real roots in ``[lo, hi]`` by Sturm bisection.

    Each root is refined to an enclosure narrower than ``width``; a root hit
    exactly by a bisection point is reported with ``exact`` set. Rational
    roots are recognized afterwards through :func:`rational_roots`.
    """
    c = trim(c)
    if not c:
        raise PolyError("zero polynomial has no isolated roots")
    if len(c) == 1:
        return []
    sq = squarefree_part(c)
    B = cauchy_bound(sq)
    lo = Fraction(lo) if lo is not None else -B
    hi = Fraction(hi) if hi is not None else B
    seq = sturm_sequence(sq)
    roots: list[RealRoot] = []
    if evaluate(sq, lo) == 0:
        roots.append(RealRoot(lo, lo, lo))
    stack = [(lo, hi)]
    brackets = []
    while stack:
        a, b = stack.pop()
        n = count_roots(seq, a, b)
        if n == 0:
            continue
        if n == 1:
            brackets.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    for a, b in brackets:
        roots.append(_refine(sq, seq, a, b, width))
    roots.sort(key=lambda r: r.lo)
    return roots


def _refine(sq: UPoly, seq, a: Fraction, b: Fraction, width: Fraction) -> RealRoot:
    # single root in (a, b]
    if evaluate(sq, b) == 0:
        return RealRoot(b, b, b)
    fa = _sign(evaluate(sq, a))
    if fa == 0:
        # a is a root of the neighbouring interval; step inside (a, root)
        step = (b - a) / 2
        while True:
            a2 = a + step
            if evaluate(sq, a2) != 0 and count_roots(seq, a2, b) == 1:
                a = a2
                break
            step /= 2
        fa = _sign(evaluate(sq, a))
    while b - a > width:
        m = (a + b) / 2
        fm = _sign(evaluate(sq, m))
        if fm == 0:
            return RealRoot(m, m, m)
        if fm == fa:
            a = m
        else:
            b = m
    return RealRoot(a, b, None)


def integer_primitive(c: UPoly) -> list[int]:
    den = lcm(*[v.denominator for v in c]) if c else 1
    ints = [int(v * den) for v in c]
    g = 0
    for v in ints:
        g = igcd(g, v)
    return [v // g for v in ints] if g else ints


def rational_roots(c: UPoly) -> list[Fraction]:
    """All distinct rational roots, found by isolation plus exact recognition."""
    c = trim(c)
    if len(c) <= 1:
        return []
    sq = squarefree_part(c)
    ints = integer_primitive(sq)
    lead = abs(ints[-1])
    # a rational root p/q has q | lead; enclosures of width < 1/(2 lead^2) pin it down
    width = Fraction(1, 4 * lead * lead + 4)
    out = []
    for r in isolate_real_roots(sq, width=width):
        if r.exact is not None:
            out.append(r.exact)
            continue
        cand = ((r.lo + r.hi) / 2).limit_denominator(lead)
        if evaluate(sq, cand) == 0:
            out.append(cand)
    return sorted(set(out))


def numeric_roots(c: UPoly) -> np.ndarray:
    c = trim(c)
    if len(c) <= 1:
        return np.array([], dtype=complex)
    return np.roots([float(v) for v in reversed(c)])
