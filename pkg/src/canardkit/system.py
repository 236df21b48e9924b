"""Slow-fast system descriptions: the line-oriented system file and built-in fixtures."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .polycore import MultiPoly, PolyError, PolySyntaxError, PolyVectorField, parse_poly
from .stratify import PLANAR, Box


class SystemFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class SlowFastSystem:
    """X = X0 + eps X1 in the plane plus optional blow-up and numerics settings."""

    X0_src: tuple[str, str]
    X1_src: tuple[str, str]
    weights: tuple[int, int, int] | None = None
    box: Box | None = None
    epsilon: float | None = None
    delta: float | None = None
    name: str = "system"

    @property
    def X0(self) -> PolyVectorField:
        return PolyVectorField(tuple(parse_poly(s, PLANAR) for s in self.X0_src))

    @property
    def X1(self) -> PolyVectorField:
        return PolyVectorField(tuple(parse_poly(s, PLANAR) for s in self.X1_src))

    def with_overrides(self, **kw) -> "SlowFastSystem":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_text(self) -> str:
        lines = [f"# {self.name}", f"X0 = {self.X0_src[0]} ; {self.X0_src[1]}", f"X1 = {self.X1_src[0]} ; {self.X1_src[1]}"]
        if self.weights:
            lines.append("weights = " + ",".join(str(w) for w in self.weights))
        if self.box:
            lines.append("box = " + ",".join(str(v) for v in self.box.as_tuple()))
        if self.epsilon is not None:
            lines.append(f"epsilon = {self.epsilon!r}")
        if self.delta is not None:
            lines.append(f"delta = {self.delta!r}")
        return "\n".join(lines) + "\n"


_KEYS = {"X0", "X1", "weights", "box", "epsilon", "delta"}


def _pair(value: str, key: str, line: int) -> tuple[str, str]:
    parts = [p.strip() for p in value.split(";")]
    if len(parts) != 2 or not all(parts):
        raise SystemFileError(f"{key} needs two expressions separated by ';'", line)
    for p in parts:
        try:
            parse_poly(p, PLANAR)
        except PolySyntaxError as exc:
            raise SystemFileError(f"{key}: {exc}", line) from None
        except PolyError as exc:
            raise SystemFileError(f"{key}: {exc}", line) from None
    return parts[0], parts[1]


def parse_weights(value: str, line: int | None = None) -> tuple[int, int, int]:
    try:
        w = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise SystemFileError(f"weights must be integers: {value!r}", line) from None
    if len(w) != 3 or any(v <= 0 for v in w):
        raise SystemFileError(f"weights must be three positive integers: {value!r}", line)
    return w  # type: ignore[return-value]


def parse_box(value: str, line: int | None = None) -> Box:
    try:
        vals = [Fraction(v.strip()) for v in value.split(",")]
    except (ValueError, ZeroDivisionError):
        raise SystemFileError(f"box corners must be rationals: {value!r}", line) from None
    if len(vals) != 4:
        raise SystemFileError("box needs xmin,xmax,ymin,ymax", line)
    try:
        return Box(*vals)
    except ValueError as exc:
        raise SystemFileError(str(exc), line) from None


def _positive_float(value: str, key: str, line: int) -> float:
    try:
        v = float(value)
    except ValueError:
        raise SystemFileError(f"{key} must be a number: {value!r}", line) from None
    if not v > 0:
        raise SystemFileError(f"{key} must be positive", line)
    return v


def parse_system(text: str, name: str = "system") -> SlowFastSystem:
    seen: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemFileError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise SystemFileError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise SystemFileError(f"duplicate key {key!r}", lineno)
        if key in ("X0", "X1"):
            seen[key] = _pair(value, key, lineno)
        elif key == "weights":
            seen[key] = parse_weights(value, lineno)
        elif key == "box":
            seen[key] = parse_box(value, lineno)
        else:
            seen[key] = _positive_float(value, key, lineno)
    for key in ("X0", "X1"):
        if key not in seen:
            raise SystemFileError(f"missing {key}")
    return SlowFastSystem(
        seen["X0"], seen["X1"], seen.get("weights"), seen.get("box"),
        seen.get("epsilon"), seen.get("delta"), name,
    )


def load_system(path: str | Path) -> SlowFastSystem:
    p = Path(path)
    return parse_system(p.read_text(encoding="utf-8"), name=p.stem)


TRANSCRITICAL = SlowFastSystem(
    ("(y-x)*(y+x)*(y-x/2)*(y+x/2)", "0"),
    ("1", "1/2"),
    weights=(1, 1, 4),
    box=Box(-1, 1, -1, 1),
    epsilon=1e-3,
    delta=1e-3,
    name="transcritical",
)

PITCHFORK = SlowFastSystem(
    ("(x+y/2)*(x-y/2)*(y-x^2)", "0"),
    ("-1", "-x"),
    weights=(1, 2, 4),
    box=Box(-1, 1, -1, 1),
    epsilon=1e-3,
    delta=1e-3,
    name="pitchfork",
)

FIXTURES = {"transcritical": TRANSCRITICAL, "pitchfork": PITCHFORK}
