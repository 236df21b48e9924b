"""Exact polynomial algebra over Q and the expression parser."""
from __future__ import annotations

from .algebra import (
    Factorization,
    NotDivisible,
    content,
    div_exact,
    divides,
    factor_list,
    gcd_poly,
    primitive_part,
    resultant,
    split_squarefree,
    squarefree_decomposition,
    squarefree_factor,
)
from .parser import PolySyntaxError, format_poly, format_rational, parse_poly, tokenize
from .poly import (
    DEFAULT_VARIABLES,
    MultiPoly,
    PolyError,
    PolyVectorField,
    arith,
    as_fraction,
    compile_poly,
    differentiate,
    divide_by_power,
    eval_poly,
    r_valuation,
    substitute,
    vector_field,
)

__all__ = [
    "DEFAULT_VARIABLES",
    "Factorization",
    "MultiPoly",
    "NotDivisible",
    "PolyError",
    "PolySyntaxError",
    "PolyVectorField",
    "arith",
    "as_fraction",
    "compile_poly",
    "content",
    "differentiate",
    "div_exact",
    "divide_by_power",
    "divides",
    "eval_poly",
    "factor_list",
    "format_poly",
    "format_rational",
    "gcd_poly",
    "parse_poly",
    "primitive_part",
    "r_valuation",
    "resultant",
    "split_squarefree",
    "squarefree_decomposition",
    "squarefree_factor",
    "substitute",
    "tokenize",
    "vector_field",
]
