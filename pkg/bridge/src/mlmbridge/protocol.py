"""Wire protocol constants and response schemas.

The protocol is newline-delimited JSON.  Requests carry an ``op`` field
(``ping``, ``predict`` or ``fill_mask``); every reply is a single JSON
object.  Failures are reported in-band as ``{"error": ..., "op": ...}``
rather than by closing the connection.

The schemas here describe what the bridge promises to emit; tests validate
every recorded response against them.
"""

from __future__ import annotations

from typing import Any

PROTOCOL_VERSION = 1

# Placeholder the engine writes into masked slots of a fill_mask request.
ENGINE_MASK = "[MASK]"

_LIKELIHOOD = {"type": "number", "minimum": 0.0, "maximum": 1.0}

RESPONSE_SCHEMAS: dict[str, dict[str, Any]] = {
    "ping": {
        "type": "object",
        "required": ["ok", "protocol", "serial"],
        "properties": {
            "ok": {"const": True},
            "protocol": {"const": PROTOCOL_VERSION},
            "serial": {"const": True},
            "name": {"type": "string"},
            "model": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "predict": {
        "type": "object",
        "required": ["label", "score"],
        "properties": {
            "label": {"type": "boolean"},
            "score": _LIKELIHOOD,
        },
        "additionalProperties": False,
    },
    "fill_mask": {
        "type": "object",
        "required": ["candidates"],
        "properties": {
            "candidates": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["replacements", "likelihood"],
                    "properties": {
                        "replacements": {
                            "type": "array",
                            "items": {"type": "string", "minLength": 1},
                            "minItems": 1,
                        },
                        "likelihood": _LIKELIHOOD,
                    },
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
    "error": {
        "type": "object",
        "required": ["error"],
        "properties": {
            "error": {"type": "string", "minLength": 1},
            "op": {"type": ["string", "null"]},
        },
        "additionalProperties": False,
    },
}


def response_kind(reply: dict[str, Any]) -> str:
    """Name the schema a bridge reply should satisfy."""
    if "error" in reply:
        return "error"
    if "ok" in reply:
        return "ping"
    if "label" in reply:
        return "predict"
    if "candidates" in reply:
        return "fill_mask"
    raise ValueError(f"reply matches no known response shape: {reply!r}")


def validate_response(reply: dict[str, Any]) -> str:
    """Validate a reply against its schema; returns the schema name.

    Needs the ``jsonschema`` package (a test dependency, not a runtime one).
    """
    import jsonschema

    kind = response_kind(reply)
    jsonschema.validate(reply, RESPONSE_SCHEMAS[kind])
    return kind
