"""Recursive-descent parser and canonical printer for polynomial expressions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*        # "/" only by a nonzero constant
    unary  := "-" unary | factor
    factor := base ("^" UINT)?
    base   := RATIONAL | IDENT | "(" expr ")"

Implicit multiplication ("2x") is a syntax error.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import DEFAULT_VARIABLES, MultiPoly, PolyError


class PolySyntaxError(PolyError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # INT, IDENT, OP, EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def tokenize(src: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(src)
    while pos < n:
        # track newlines for error positions
        while pos < n and src[pos].isspace():
            if src[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(src, pos)
        col = pos - line_start + 1
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character {src[pos]!r}", line, col)
        if m.group(1) is not None:
            tokens.append(Token("INT", m.group(1), line, col))
        elif m.group(2) is not None:
            tokens.append(Token("IDENT", m.group(2), line, col))
        else:
            text = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(Token("OP", text, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, src: str, variables: Sequence[str]):
        self.tokens = tokenize(src)
        self.i = 0
        self.vars = tuple(variables)

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise PolySyntaxError(msg, tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "OP" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self) -> MultiPoly:
        if self.tok.kind == "EOF":
            self.error("empty expression")
        p = self.expr()
        if self.tok.kind != "EOF":
            if self.tok.kind in ("INT", "IDENT") or self.tok.text == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            self.error(f"unexpected token {self.tok.text!r}")
        return p

    def expr(self) -> MultiPoly:
        p = self.term()
        while True:
            if self.accept("+"):
                p = p + self.term()
            elif self.accept("-"):
                p = p - self.term()
            else:
                return p

    def term(self) -> MultiPoly:
        p = self.unary()
        while True:
            if self.accept("*"):
                p = p * self.unary()
            elif self.tok.kind == "OP" and self.tok.text == "/":
                slash = self.tok
                self.i += 1
                d = self.unary()
                if not d.is_constant:
                    self.error("division is only allowed by a constant", slash)
                if d.is_zero:
                    self.error("division by zero", slash)
                p = p / d.constant_value()
            else:
                return p

    def unary(self) -> MultiPoly:
        if self.accept("-"):
            return -self.unary()
        return self.factor()

    def factor(self) -> MultiPoly:
        base = self.base()
        if self.tok.kind == "OP" and self.tok.text == "^":
            self.i += 1
            if self.tok.kind != "INT":
                self.error("exponent must be a non-negative integer literal")
            k = int(self.tok.text)
            self.i += 1
            return base ** k
        return base

    def base(self) -> MultiPoly:
        tok = self.tok
        if tok.kind == "INT":
            self.i += 1
            return MultiPoly.constant(self.vars, Fraction(int(tok.text)))
        if tok.kind == "IDENT":
            if tok.text not in self.vars:
                self.error(f"unknown variable {tok.text!r} (declared: {', '.join(self.vars)})")
            self.i += 1
            return MultiPoly.var(self.vars, tok.text)
        if self.accept("("):
            p = self.expr()
            if not self.accept(")"):
                self.error("expected ')'")
            return p
        if tok.kind == "EOF":
            self.error("unexpected end of expression")
        self.error(f"unexpected token {tok.text!r}")


def parse_poly(src: str, variables: Sequence[str] = DEFAULT_VARIABLES) -> MultiPoly:
    """Parse ``src`` into its canonical expanded polynomial over ``variables``."""
    return _Parser(src, variables).parse()


def format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: MultiPoly) -> str:
    """Canonical text: grlex-descending terms, ``c*x^a*y^b`` style."""
    if p.is_zero:
        return "0"
    parts = []
    for exp, c in p.sorted_terms():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(p.variables, exp) if k
        )
        a = abs(c)
        if not mono:
            body = format_rational(a)
        elif a == 1:
            body = mono
        else:
            body = f"{format_rational(a)}*{mono}"
        sign = "-" if c < 0 else "+"
        if not parts:
            parts.append(f"-{body}" if c < 0 else body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)
