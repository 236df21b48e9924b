"""JSON schema of the report document (version 1)."""
from __future__ import annotations

import jsonschema

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}
NUMBER = {"anyOf": [{"type": "number"}, {"enum": ["nan", "inf", "-inf"]}]}
EXACT_OR_FLOAT = {"anyOf": [RATIONAL, NUMBER]}

_branch = {
    "type": "object",
    "required": ["id", "poly", "multiplicity", "split_complete"],
    "properties": {
        "id": {"type": "integer"},
        "poly": {"type": "string"},
        "multiplicity": {"type": "integer", "minimum": 1},
        "split_complete": {"type": "boolean"},
    },
}

_point = {
    "type": "object",
    "required": ["location", "exact", "incident_branches", "pairwise_transversal"],
    "properties": {
        "location": {"type": "array", "items": EXACT_OR_FLOAT, "minItems": 2, "maxItems": 2},
        "exact": {"type": "boolean"},
        "incident_branches": {"type": "array", "items": {"type": "integer"}},
        "pairwise_transversal": {"type": "boolean"},
    },
}

_verdict = {
    "type": "object",
    "required": ["branch_id", "poly", "wedge", "exact", "is_canard", "orientation"],
    "properties": {
        "branch_id": {"type": "integer"},
        "poly": {"type": "string"},
        "wedge": EXACT_OR_FLOAT,
        "exact": {"type": "boolean"},
        "is_canard": {"type": "boolean"},
        "orientation": {"type": "string"},
    },
}

_equilibrium = {
    "type": "object",
    "required": ["theta", "classification", "label"],
    "properties": {
        "theta": {"type": "number"},
        "classification": {"type": "string"},
        "label": {"type": "string"},
    },
}

_check = {
    "type": "object",
    "required": ["id", "name", "passed", "detail"],
    "properties": {
        "id": {"type": "string"},
        "name": {"type": "string"},
        "passed": {"type": "boolean"},
        "detail": {"type": "string"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "warnings"],
    "properties": {
        "schema": {"const": 1},
        "command": {"enum": ["analyze", "blowup", "simulate", "circle-lemma", "verify-paper"]},
        "warnings": {"type": "array", "items": {"type": "string"}},
        "system": {
            "type": "object",
            "required": ["name", "X0", "X1"],
            "properties": {
                "X0": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                "X1": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                "box": {"anyOf": [{"type": "null"}, {"type": "array", "items": RATIONAL}]},
            },
        },
        "critical_set": {
            "type": "object",
            "required": ["verdict", "branches", "singular_points"],
            "properties": {
                "branches": {"type": "array", "items": _branch},
                "singular_points": {"type": "array", "items": _point},
            },
        },
        "canard": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["singular_point", "branches", "canard_branches"],
                "properties": {"branches": {"type": "array", "items": _verdict}},
            },
        },
        "blowup": {
            "type": "object",
            "required": ["weights"],
            "properties": {
                "weights": {"type": "array", "items": {"type": "integer"}},
                "division_exponent": {"type": "integer"},
                "equator": {"type": "array", "items": _equilibrium},
            },
        },
        "simulation": {"type": "object"},
        "circle_lemma": {"type": "array"},
        "checks": {"type": "array", "items": _check},
    },
}


def validate(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)
