"""Exact division, gcd, resultants and factorization for MultiPoly.

The gcd is the recursive primitive-PRS algorithm over Q[other vars][main var].
Factorization is square-free (Yun) followed by a bounded splitting step that
extracts every rational factor of total degree <= 2 which is a graph over one
of the two variables (lines, parabolas, hyperbolas ``x*y - c``) plus univariate
rational-root and quadratic factors. Pieces that cannot be split that way and
have degree >= 3 are returned whole and flagged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from . import univariate as U
from .poly import MultiPoly, PolyError, grlex_key


class NotDivisible(PolyError):
    pass


def div_exact(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Return p / q, raising :class:`NotDivisible` if q does not divide p."""
    if p.variables != q.variables:
        raise PolyError(f"variable lists differ: {p.variables} vs {q.variables}")
    if q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if q.is_constant:
        return p / q.constant_value()
    lq = q.leading_exponent()
    lc = q.terms[lq]
    qterms = list(q.terms.items())
    rem = dict(p.terms)
    quot: dict = {}
    while rem:
        e = max(rem, key=grlex_key)
        d = tuple(a - b for a, b in zip(e, lq))
        if any(k < 0 for k in d):
            raise NotDivisible("polynomial division leaves a remainder")
        f = rem[e] / lc
        quot[d] = f
        for qe, qc in qterms:
            ne = tuple(a + b for a, b in zip(d, qe))
            v = rem.get(ne, 0) - f * qc
            if v:
                rem[ne] = v
            else:
                rem.pop(ne, None)
    return MultiPoly(p.variables, quot)


def divides(q: MultiPoly, p: MultiPoly) -> bool:
    try:
        div_exact(p, q)
    except NotDivisible:
        return False
    return True


def _lead_in(p: MultiPoly, var: str) -> tuple[int, MultiPoly]:
    coeffs = p.coefficients_in(var)
    d = max(coeffs)
    return d, coeffs[d]


def pseudo_remainder(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    """A multiple of prem(a, b) by a nonzero factor free of ``var``."""
    db, lb = _lead_in(b, var)
    X = MultiPoly.var(a.variables, var)
    r = a
    while not r.is_zero and r.degree_in(var) >= db:
        dr, lr = _lead_in(r, var)
        r = lb * r - lr * X ** (dr - db) * b
    return r


def _first_used(*ps: MultiPoly) -> str | None:
    used = set()
    for p in ps:
        used.update(p.used_variables())
    for v in ps[0].variables:
        if v in used:
            return v
    return None


def content(p: MultiPoly, var: str) -> MultiPoly:
    """Monic gcd of the coefficients of p viewed as a polynomial in ``var``."""
    g = None
    for c in p.coefficients_in(var).values():
        g = c.monic() if g is None else _gcd(g, c)
        if g.is_constant:
            return MultiPoly.constant(p.variables, 1)
    return g if g is not None else MultiPoly.zero(p.variables)


def primitive_part(p: MultiPoly, var: str) -> MultiPoly:
    if p.is_zero:
        return p
    return div_exact(p, content(p, var)).monic()


def _gcd(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    if p.is_zero:
        return q.monic()
    if q.is_zero:
        return p.monic()
    one = MultiPoly.constant(p.variables, 1)
    var = _first_used(p, q)
    if var is None:
        return one
    cp, cq = content(p, var), content(q, var)
    c = _gcd(cp, cq)
    pp, qq = div_exact(p, cp), div_exact(q, cq)
    if pp.degree_in(var) <= 0 or qq.degree_in(var) <= 0:
        return c
    a, b = (pp, qq) if pp.degree_in(var) >= qq.degree_in(var) else (qq, pp)
    b = b.monic()
    while True:
        r = pseudo_remainder(a, b, var)
        if r.is_zero:
            g = b
            break
        if r.degree_in(var) <= 0:
            g = one
            break
        a, b = b, primitive_part(r, var)
    g = primitive_part(g, var) if not g.is_constant else one
    return (c * g).monic()


def gcd_poly(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Greatest common divisor with grlex leading coefficient 1."""
    if p.variables != q.variables:
        raise PolyError(f"variable lists differ: {p.variables} vs {q.variables}")
    if p.is_zero and q.is_zero:
        raise PolyError("gcd of two zero polynomials is undefined")
    return _gcd(p, q)


def resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """Sylvester resultant in ``var`` via fraction-free (Bareiss) elimination."""
    if p.variables != q.variables:
        raise PolyError(f"variable lists differ: {p.variables} vs {q.variables}")
    if p.is_zero or q.is_zero:
        return MultiPoly.zero(p.variables)
    m, n = p.degree_in(var), q.degree_in(var)
    if m == 0 and n == 0:
        return MultiPoly.constant(p.variables, 1)
    if m == 0:
        return p ** n
    if n == 0:
        return q ** m
    pc, qc = p.coefficients_in(var), q.coefficients_in(var)
    zero = MultiPoly.zero(p.variables)
    N = m + n
    M = [[zero] * N for _ in range(N)]
    for i in range(n):
        for k in range(m + 1):
            M[i][i + k] = pc.get(m - k, zero)
    for i in range(m):
        for k in range(n + 1):
            M[n + i][i + k] = qc.get(n - k, zero)
    sign = 1
    prev = MultiPoly.constant(p.variables, 1)
    for k in range(N - 1):
        if M[k][k].is_zero:
            for i in range(k + 1, N):
                if not M[i][k].is_zero:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return zero
        for i in range(k + 1, N):
            for j in range(k + 1, N):
                M[i][j] = div_exact(M[i][j] * M[k][k] - M[i][k] * M[k][j], prev)
        prev = M[k][k]
    return M[N - 1][N - 1] * sign


# ---------------------------------------------------------------------------
# square-free decomposition


def _yun(f: MultiPoly, var: str) -> list[tuple[MultiPoly, int]]:
    # f primitive in var with positive degree
    fp = f.diff(var)
    a = _gcd(f, fp)
    b = div_exact(f, a)
    c = div_exact(fp, a)
    d = c - b.diff(var)
    out = []
    i = 1
    while not b.is_constant:
        ai = _gcd(b, d)
        b = div_exact(b, ai)
        c = div_exact(d, ai)
        d = c - b.diff(var)
        if not ai.is_constant:
            out.append((ai.monic(), i))
        i += 1
    return out


def squarefree_decomposition(p: MultiPoly) -> list[tuple[MultiPoly, int]]:
    """Pairwise coprime square-free factors with multiplicities (unit dropped)."""
    if p.is_zero:
        raise PolyError("square-free decomposition of the zero polynomial")
    var = _first_used(p)
    if var is None:
        return []
    c = content(p, var)
    pp = div_exact(p, c)
    out = _yun(pp, var) if pp.degree_in(var) > 0 else []
    if not c.is_constant:
        out.extend(squarefree_decomposition(c))
    return out


# ---------------------------------------------------------------------------
# bounded splitting of square-free parts


_SLICE_POINTS = [Fraction(n, d) for n, d in
                 [(1, 3), (-2, 5), (3, 7), (5, 11), (-7, 13), (2, 1), (-3, 2), (11, 17), (13, 19), (-17, 23)]]
_SERIES_ORDER = 10


def _taylor_shift(c: list, x0: Fraction) -> list:
    # coefficients of c(x0 + t)
    n = len(c)
    return [sum(c[i] * comb(i, k) * x0 ** (i - k) for i in range(k, n)) for k in range(n)]


def _s_mul(a: list, b: list, N: int) -> list:
    out = [Fraction(0)] * N
    for i, x in enumerate(a[:N]):
        if x:
            for j, y in enumerate(b[: N - i]):
                out[i + j] += x * y
    return out


def _s_inv(a: list, N: int) -> list:
    inv = [Fraction(0)] * N
    inv[0] = 1 / a[0]
    for k in range(1, N):
        s = sum(a[j] * inv[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        inv[k] = -s * inv[0]
    return inv


def _series_root(coeffs: list[list], y0: Fraction, N: int) -> list:
    """Power-series root Y(t) of sum_j coeffs[j](t) Y^j with Y(0) = y0 (simple root)."""
    Y = [Fraction(0)] * N
    Y[0] = y0
    cs = [(c + [Fraction(0)] * N)[:N] for c in coeffs]
    for _ in range(N.bit_length() + 1):
        P = [Fraction(0)] * N
        dP = [Fraction(0)] * N
        for j in range(len(cs) - 1, -1, -1):
            dP = [u + v for u, v in zip(_s_mul(dP, Y, N), P)]
            P = [u + v for u, v in zip(_s_mul(P, Y, N), cs[j])]
        if not any(P):
            break
        step = _s_mul(P, _s_inv(dP, N), N)
        Y = [u - v for u, v in zip(Y, step)]
    return Y


def _graph_candidates(Y: list, main: MultiPoly, t: MultiPoly) -> list[MultiPoly]:
    N = len(Y)
    cands = []
    if not any(Y[2:]):
        cands.append(main - Y[0] - Y[1] * t)
    elif not any(Y[3:]):
        cands.append(main - Y[0] - Y[1] * t - Y[2] * t ** 2)
    elif Y[2] != 0:
        b1 = -Y[3] / Y[2]
        if all(Y[k] + b1 * Y[k - 1] == 0 for k in range(3, N)):
            a = [-(Y[0]), -(Y[1] + b1 * Y[0]), -(Y[2] + b1 * Y[1])]
            cands.append((1 + b1 * t) * main + a[0] + a[1] * t + a[2] * t ** 2)
    return cands


def _find_graph_factor(f: MultiPoly, main: str, other: str) -> MultiPoly | None:
    """A factor of total degree <= 2 and degree 1 in ``main``, if one exists."""
    vs = f.variables
    coeffs_mp = f.coefficients_in(main)
    n = max(coeffs_mp)
    ucoeffs = [U.from_multipoly(coeffs_mp.get(j, MultiPoly.zero(vs)), other) for j in range(n + 1)]
    for x0 in _SLICE_POINTS:
        if U.evaluate(ucoeffs[n], x0) == 0:
            continue
        g = U.trim([U.evaluate(c, x0) for c in ucoeffs])
        if len(U.gcd(g, U.derivative(g))) > 1:
            continue
        break
    else:
        return None
    shifted = [_taylor_shift(c, x0) for c in ucoeffs]
    M = MultiPoly.var(vs, main)
    t = MultiPoly.var(vs, other) - x0
    for y0 in U.rational_roots(g):
        Y = _series_root(shifted, y0, _SERIES_ORDER)
        for cand in _graph_candidates(Y, M, t):
            if divides(cand, f):
                return cand.monic()
    return None


def _split_univariate(f: MultiPoly, var: str) -> tuple[list[MultiPoly], list[MultiPoly]]:
    vs = f.variables
    c = U.from_multipoly(f, var)
    factors = []
    for r in U.rational_roots(c):
        lin = [-r, Fraction(1)]
        c = U.divmod_poly(c, lin)[0]
        factors.append(U.to_multipoly(lin, vs, var))
    unsplit = []
    while U.degree(c) >= 3:
        found = None
        roots = U.numeric_roots(c)
        for i, j in combinations(range(len(roots)), 2):
            s, pr = roots[i] + roots[j], roots[i] * roots[j]
            if abs(s.imag) > 1e-8 * (1 + abs(s)) or abs(pr.imag) > 1e-8 * (1 + abs(pr)):
                continue
            quad = [Fraction(pr.real).limit_denominator(10**6), -Fraction(s.real).limit_denominator(10**6), Fraction(1)]
            q, rem = U.divmod_poly(c, quad)
            if not rem:
                found = quad
                c = q
                break
        if found is None:
            break
        factors.append(U.to_multipoly(found, vs, var))
    if U.degree(c) >= 1:
        piece = U.to_multipoly(U.monic(c), vs, var)
        factors.append(piece)
        if U.degree(c) >= 3:
            unsplit.append(piece)
    return factors, unsplit


def split_squarefree(f: MultiPoly) -> tuple[list[MultiPoly], list[MultiPoly]]:
    """Split a square-free polynomial into rational factors of degree <= 2.

    Returns ``(factors, unsplit)``; ``unsplit`` lists the returned factors of
    degree >= 3 that this bounded procedure could not split further.
    """
    f = f.monic()
    if f.degree() <= 1:
        return [f], []
    used = f.used_variables()
    if len(used) == 1:
        return _split_univariate(f, used[0])
    if len(used) > 2:
        return [f], ([f] if f.degree() >= 3 else [])
    factors: list[MultiPoly] = []
    unsplit: list[MultiPoly] = []
    rest = f
    # factors free of one variable are univariate in the other
    for v, w in ((used[0], used[1]), (used[1], used[0])):
        c = content(rest, v)
        if not c.is_constant:
            fs, us = _split_univariate(c, w)
            factors.extend(fs)
            unsplit.extend(us)
            rest = div_exact(rest, c)
    for main, other in ((used[1], used[0]), (used[0], used[1])):
        while rest.degree() > 1 and rest.degree_in(main) > 0:
            h = _find_graph_factor(rest, main, other)
            if h is None:
                break
            factors.append(h)
            rest = div_exact(rest, h)
    if not rest.is_constant:
        rest = rest.monic()
        factors.append(rest)
        if rest.degree() >= 3:
            unsplit.append(rest)
    return factors, unsplit


@dataclass(frozen=True)
class Factorization:
    unit: Fraction
    factors: tuple[tuple[MultiPoly, int], ...]
    unsplit: tuple[MultiPoly, ...] = field(default_factory=tuple)
    variables: tuple[str, ...] = ()

    def expand(self) -> MultiPoly:
        out = MultiPoly.constant(self.variables, self.unit)
        for f, m in self.factors:
            out = out * f ** m
        return out


def _factor_sort_key(fm: tuple[MultiPoly, int]):
    f, m = fm
    return (f.degree(), str(f), m)


def factor_list(p: MultiPoly) -> Factorization:
    """Square-free decomposition refined into degree <= 2 rational factors."""
    if p.is_zero:
        raise PolyError("cannot factor the zero polynomial")
    out: list[tuple[MultiPoly, int]] = []
    unsplit: list[MultiPoly] = []
    for sf, mult in squarefree_decomposition(p):
        fs, us = split_squarefree(sf)
        out.extend((f, mult) for f in fs)
        unsplit.extend(us)
    out.sort(key=_factor_sort_key)
    prod = MultiPoly.constant(p.variables, 1)
    for f, m in out:
        prod = prod * f ** m
    unit = div_exact(p, prod).constant_value()
    return Factorization(unit, tuple(out), tuple(unsplit), p.variables)


def squarefree_factor(p: MultiPoly) -> list[tuple[MultiPoly, int]]:
    """``[(factor, multiplicity), ...]`` with product equal to p up to a rational unit."""
    return list(factor_list(p).factors)
