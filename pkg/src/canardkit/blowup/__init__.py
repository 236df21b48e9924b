"""Weighted blow-up of a nilpotent singular point of the eps-extended field."""
from __future__ import annotations

from .charts import (
    CHARTS,
    CHART_VARS,
    EXT_VARS,
    BlownUpChart,
    BlowupError,
    Weights,
    all_charts,
    chart_field,
    division_exponent,
    extend_field,
    weighted_leading_part,
    weighted_order,
)
from .circle import CircleLemmaSystem, circle_lemma
from .sphere import (
    ConnectionResult,
    SphereChartError,
    SphereEquilibrium,
    SphereField,
    SymmetryResult,
    connection_trace,
    equator_equilibria,
    nearest,
    sphere_field,
    sphere_point,
    symmetry_check_pitchfork,
)

__all__ = [
    "CHARTS",
    "CHART_VARS",
    "EXT_VARS",
    "BlownUpChart",
    "BlowupError",
    "CircleLemmaSystem",
    "ConnectionResult",
    "SphereChartError",
    "SphereEquilibrium",
    "SphereField",
    "SymmetryResult",
    "Weights",
    "all_charts",
    "chart_field",
    "circle_lemma",
    "connection_trace",
    "division_exponent",
    "equator_equilibria",
    "extend_field",
    "nearest",
    "sphere_field",
    "sphere_point",
    "symmetry_check_pitchfork",
    "weighted_leading_part",
    "weighted_order",
]
