"""Sparse multivariate polynomials with exact rational coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence, Union

Exponent = tuple[int, ...]
Scalar = Union[int, Fraction]

DEFAULT_VARIABLES = ("x", "y", "eps")


class PolyError(ValueError):
    """Raised on malformed polynomial operations (variable mismatch, bad exponent, ...)."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise PolyError(f"not an exact rational: {value!r}")


def grlex_key(exp: Exponent) -> tuple[int, Exponent]:
    """Graded lexicographic key; earlier variables dominate ties."""
    return (sum(exp), exp)


class MultiPoly:
    """Immutable polynomial over Q in an ordered list of variables.

    Terms are kept as ``{exponent tuple: Fraction}`` with no zero coefficients,
    so equality of two polynomials over the same variables is equality of the
    term maps.
    """

    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, Scalar] | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise PolyError(f"duplicate variables in {variables}")
        n = len(variables)
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise PolyError(f"exponent {exp} does not match variables {variables}")
            if any(e < 0 for e in exp):
                raise PolyError(f"negative exponent {exp}")
            c = as_fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        object.__setattr__(self, "_vars", variables)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # constructors -----------------------------------------------------------
    @classmethod
    def _raw(cls, variables: tuple[str, ...], terms: dict[Exponent, Fraction]) -> "MultiPoly":
        # trusted fast path: terms already canonical
        obj = object.__new__(cls)
        object.__setattr__(obj, "_vars", variables)
        object.__setattr__(obj, "_terms", terms)
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MultiPoly":
        return cls._raw(tuple(variables), {})

    @classmethod
    def constant(cls, variables: Sequence[str], c: Scalar) -> "MultiPoly":
        variables = tuple(variables)
        c = as_fraction(c)
        return cls._raw(variables, {(0,) * len(variables): c} if c else {})

    @classmethod
    def var(cls, variables: Sequence[str], name: str) -> "MultiPoly":
        variables = tuple(variables)
        if name not in variables:
            raise PolyError(f"unknown variable {name!r}")
        exp = tuple(1 if v == name else 0 for v in variables)
        return cls._raw(variables, {exp: Fraction(1)})

    # basic accessors --------------------------------------------------------
    @property
    def variables(self) -> tuple[str, ...]:
        return self._vars

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise PolyError("polynomial is not constant")
        return next(iter(self._terms.values()), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self._index(name)
        return max((e[i] for e in self._terms), default=-1)

    def used_variables(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self._vars) if any(e[i] for e in self._terms))

    def leading_exponent(self) -> Exponent:
        if not self._terms:
            raise PolyError("zero polynomial has no leading term")
        return max(self._terms, key=grlex_key)

    def leading_coefficient(self) -> Fraction:
        return self._terms[self.leading_exponent()]

    def monic(self) -> "MultiPoly":
        if not self._terms:
            return self
        return self * (1 / self.leading_coefficient())

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def _index(self, name: str) -> int:
        try:
            return self._vars.index(name)
        except ValueError:
            raise PolyError(f"unknown variable {name!r}") from None

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other._vars != self._vars:
                raise PolyError(f"variable lists differ: {self._vars} vs {other._vars}")
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return MultiPoly.constant(self._vars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MultiPoly._raw(self._vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self._vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MultiPoly._raw(self._vars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # only division by a nonzero scalar; use div_exact for polynomials
        if isinstance(other, (int, Fraction, Rational)):
            if other == 0:
                raise ZeroDivisionError("division of polynomial by zero")
            inv = 1 / as_fraction(other)
            return MultiPoly._raw(self._vars, {e: c * inv for e, c in self._terms.items()})
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise PolyError(f"exponent must be a non-negative integer, got {n!r}")
        result = MultiPoly.constant(self._vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self._vars == other._vars and self._terms == other._terms
        if isinstance(other, (int, Fraction, Rational)):
            return self.is_constant and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self._vars, frozenset(self._terms.items()))))
        return self._hash

    def __repr__(self):
        from .parser import format_poly

        return f"MultiPoly({format_poly(self)!r}, vars={self._vars})"

    def __str__(self):
        from .parser import format_poly

        return format_poly(self)

    # structural -------------------------------------------------------------
    def with_variables(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-embed into another variable list containing every used variable."""
        variables = tuple(variables)
        for v in self.used_variables():
            if v not in variables:
                raise PolyError(f"variable {v!r} missing from {variables}")
        idx = [self._vars.index(v) if v in self._vars else None for v in variables]
        out = {}
        for e, c in self._terms.items():
            out[tuple(e[i] if i is not None else 0 for i in idx)] = c
        return MultiPoly._raw(variables, out)

    def diff(self, name: str) -> "MultiPoly":
        i = self._index(name)
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1 :]
                out[ne] = c * e[i]
        return MultiPoly._raw(self._vars, out)

    def coefficients_in(self, name: str) -> dict[int, "MultiPoly"]:
        """Split as sum_k c_k * name^k; the c_k live in the same variable list."""
        i = self._index(name)
        buckets: dict[int, dict[Exponent, Fraction]] = {}
        for e, c in self._terms.items():
            k = e[i]
            buckets.setdefault(k, {})[e[:i] + (0,) + e[i + 1 :]] = c
        return {k: MultiPoly._raw(self._vars, t) for k, t in buckets.items()}

    def valuation(self, name: str) -> float | int:
        """Largest k with name^k dividing self; +inf for zero."""
        if not self._terms:
            return float("inf")
        i = self._index(name)
        return min(e[i] for e in self._terms)

    def shift_power(self, name: str, k: int) -> "MultiPoly":
        """Multiply by name^k (k may be negative when the division is exact)."""
        i = self._index(name)
        out = {}
        for e, c in self._terms.items():
            ne = e[i] + k
            if ne < 0:
                raise PolyError(f"{name}^{-k} does not divide polynomial")
            out[e[:i] + (ne,) + e[i + 1 :]] = c
        return MultiPoly._raw(self._vars, out)

    def subs(self, bindings: Mapping[str, "MultiPoly | Scalar"]) -> "MultiPoly":
        return substitute(self, bindings)

    def __call__(self, **point):
        return eval_poly(self, point)

    def compile(self, args: Sequence[str] | None = None) -> Callable:
        """Float evaluator (nested Horner) usable on scalars and numpy arrays."""
        return compile_poly(self, args)


@dataclass(frozen=True)
class PolyVectorField:
    """Polynomial vector field; all components share one variable list."""

    components: tuple[MultiPoly, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise PolyError("vector field needs at least one component")
        vs = comps[0].variables
        for c in comps:
            if c.variables != vs:
                raise PolyError("vector field components use different variable lists")
        object.__setattr__(self, "components", comps)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.components[0].variables

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> MultiPoly:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def with_variables(self, variables: Sequence[str]) -> "PolyVectorField":
        return PolyVectorField(tuple(c.with_variables(variables) for c in self.components))

    def scale(self, c) -> "PolyVectorField":
        return PolyVectorField(tuple(comp * c for comp in self.components))

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        if len(other) != len(self):
            raise PolyError("vector fields have different dimensions")
        return PolyVectorField(tuple(a + b for a, b in zip(self, other)))

    def evaluate(self, point: Mapping[str, object]) -> tuple:
        return tuple(eval_poly(c, point) for c in self.components)

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)


# ---------------------------------------------------------------------------
# module-level operations


def _check_same(p: MultiPoly, q: MultiPoly) -> None:
    if p.variables != q.variables:
        raise PolyError(f"variable lists differ: {p.variables} vs {q.variables}")


def arith(p: MultiPoly, q, op: str) -> MultiPoly:
    """Exact ``add``/``sub``/``mul``/``pow``; for ``pow`` q is a non-negative int."""
    if op == "pow":
        if isinstance(q, MultiPoly):
            if not q.is_constant or q.constant_value().denominator != 1:
                raise PolyError("pow exponent must be a non-negative integer")
            q = int(q.constant_value())
        return p ** q
    if isinstance(q, MultiPoly):
        _check_same(p, q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise PolyError(f"unknown operation {op!r}")


def differentiate(p: MultiPoly, var: str) -> MultiPoly:
    return p.diff(var)


def r_valuation(p: MultiPoly, var: str):
    return p.valuation(var)


def divide_by_power(p: MultiPoly, var: str, k: int) -> MultiPoly:
    return p.shift_power(var, -k)


def substitute(p: MultiPoly, bindings: Mapping[str, "MultiPoly | Scalar"]) -> MultiPoly:
    """Compose p with the given bindings; unbound variables map to themselves.

    The result lives in the common variable list of the binding targets. A
    variable of p left unbound must exist in that target list.
    """
    targets = [b for b in bindings.values() if isinstance(b, MultiPoly)]
    if targets:
        out_vars = targets[0].variables
        for t in targets:
            if t.variables != out_vars:
                raise PolyError("substitution targets use different variable lists")
    else:
        out_vars = p.variables
    images: list[MultiPoly] = []
    for v in p.variables:
        if v in bindings:
            b = bindings[v]
            images.append(b if isinstance(b, MultiPoly) else MultiPoly.constant(out_vars, b))
        elif v in out_vars:
            images.append(MultiPoly.var(out_vars, v))
        else:
            if any(e[p.variables.index(v)] for e in p.terms):
                raise PolyError(f"variable {v!r} left unbound")
            images.append(MultiPoly.zero(out_vars))  # never used: exponent is zero
    result = MultiPoly.zero(out_vars)
    power_cache: dict[tuple[int, int], MultiPoly] = {}
    for e, c in p.terms.items():
        term = MultiPoly.constant(out_vars, c)
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in power_cache:
                    power_cache[key] = images[i] ** k
                term = term * power_cache[key]
        result = result + term
    return result


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def eval_poly(p: MultiPoly, point: Mapping[str, object]):
    """Evaluate p at a point; exact when every used binding is rational."""
    used = p.used_variables()
    for v in used:
        if v not in point:
            raise PolyError(f"variable {v!r} is unbound")
    if p.is_zero:
        return Fraction(0)
    exact = all(_is_exact(point[v]) for v in used)
    if exact:
        vals = [Fraction(point[v]) if v in point else Fraction(0) for v in p.variables]
        return _horner(p.sorted_terms(), vals, 0, Fraction)
    vals = [float(point[v]) if v in used else 0.0 for v in p.variables]
    return float(_horner(p.sorted_terms(), vals, 0, float))


def _horner(terms: list[tuple[Exponent, Fraction]], vals, i: int, conv):
    # nested Horner in variable i with coefficients recursing on i+1
    if i == len(vals) or not terms:
        return sum((conv(c) for _, c in terms), conv(0))
    groups: dict[int, list] = {}
    for e, c in terms:
        groups.setdefault(e[i], []).append((e, c))
    top = max(groups)
    acc = conv(0)
    x = vals[i]
    for k in range(top, -1, -1):
        acc = acc * x
        if k in groups:
            acc = acc + _horner(groups[k], vals, i + 1, conv)
    return acc


def _horner_source(terms: list[tuple[Exponent, Fraction]], names: Sequence[str], i: int) -> str:
    if i == len(names):
        return repr(float(sum(c for _, c in terms)))
    groups: dict[int, list] = {}
    for e, c in terms:
        groups.setdefault(e[i], []).append((e, c))
    if set(groups) == {0}:
        return _horner_source(groups[0], names, i + 1)
    top = max(groups)
    src = None
    for k in range(top, -1, -1):
        if src is not None:
            src = f"({src})*{names[i]}"
        if k in groups:
            inner = _horner_source(groups[k], names, i + 1)
            src = inner if src is None else f"{src}+({inner})"
    return src


def compile_poly(p: MultiPoly, args: Sequence[str] | None = None) -> Callable:
    """Build a float evaluator ``f(*args)`` from nested Horner source."""
    args = tuple(args) if args is not None else p.variables
    for v in p.used_variables():
        if v not in args:
            raise PolyError(f"variable {v!r} missing from argument list {args}")
    q = p.with_variables(args) if p.variables != args else p
    if q.is_zero:
        body = "0.0*_a0" if args else "0.0"
    else:
        names = [f"_a{i}" for i in range(len(args))]
        body = _horner_source(q.sorted_terms(), names, 0)
        # keep array shape when the polynomial is constant
        if q.is_constant and args:
            body = f"{body} + 0.0*_a0"
    names = ", ".join(f"_a{i}" for i in range(len(args)))
    code = f"lambda {names}: {body}"
    return eval(code, {"__builtins__": {}})


def vector_field(components: Iterable[MultiPoly]) -> PolyVectorField:
    return PolyVectorField(tuple(components))
