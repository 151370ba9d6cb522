"""JSON schemas for the file formats read by the CLI and loaders."""

from __future__ import annotations

from typing import Any

import jsonschema

from .errors import InputError

_number_row = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["orthant", "polyhedral", "second_order"]},
        "dim": {"type": "integer", "minimum": 1},
        "A": {"type": "array", "items": _number_row, "minItems": 1},
        "tol_mem": {"type": "number", "minimum": 0},
        "tol_int": {"type": "number", "minimum": 0},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "polyhedral"}}}, "then": {"required": ["A"]}},
        {"if": {"properties": {"type": {"enum": ["orthant", "second_order"]}}}, "then": {"required": ["dim"]}},
    ],
    "additionalProperties": False,
}

SPACE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["labels", "cone", "dist"],
    "properties": {
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1, "uniqueItems": True},
        "cone": CONE_SCHEMA,
        "dist": {"type": "array", "items": {"type": "array", "items": _number_row}},
    },
}

MAP_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["type"],
    "oneOf": [
        {
            "properties": {
                "type": {"const": "finite_table"},
                "targets": {"type": "object", "additionalProperties": {"type": "string"}},
            },
            "required": ["type", "targets"],
        },
        {
            "properties": {
                "type": {"const": "affine"},
                "A": {"type": "array", "items": _number_row, "minItems": 1},
                "b": _number_row,
                "grid": {"type": "array", "items": _number_row, "minItems": 2},
                "box": {
                    "type": "array",
                    "items": _number_row,
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
            "required": ["type", "A", "b"],
        },
    ],
}

REDUCED_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["labels", "e", "table"],
    "properties": {
        "labels": {"type": "array", "items": {"type": "string"}},
        "e": _number_row,
        "table": {"type": "array", "items": _number_row},
    },
}

SCHEMAS = {"cone": CONE_SCHEMA, "space": SPACE_SCHEMA, "map": MAP_SCHEMA, "reduced": REDUCED_SCHEMA}


def validate_document(obj: Any, kind: str) -> None:
    """Raise :class:`InputError` if ``obj`` does not match the named schema."""
    try:
        jsonschema.validate(obj, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"invalid {kind} document at {where}: {exc.message}") from None
