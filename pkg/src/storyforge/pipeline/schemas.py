"""Response schemas for each pipeline stage.

Stage boundaries are machine-readable: every provider response is validated
against its declared schema before the pipeline touches it, and a response
that fails earns exactly one reprompt before the stage gives up.
"""

from __future__ import annotations

from typing import Any

import jsonschema

from .providers import ResponseParseError

_TOPIC_ENUM = ["relationship", "social_rules", "healthy_habits"]

_CUE = {
    "type": "object",
    "required": ["character", "emotion", "observable_response"],
    "properties": {
        "character": {"type": "string"},
        "emotion": {"type": "string"},
        "observable_response": {"type": "string"},
    },
}

_TEXT_BLOCK = {
    "type": "object",
    "required": ["text"],
    "properties": {"text": {"type": "string", "minLength": 1}},
}

_CUED_BLOCK = {
    "type": "object",
    "required": ["text", "emotion_cues"],
    "properties": {
        "text": {"type": "string", "minLength": 1},
        "emotion_cues": {"type": "array", "items": _CUE, "minItems": 1},
    },
}

RESPONSE_SCHEMAS: dict[str, dict[str, Any]] = {
    "topic": {
        "type": "object",
        "required": ["topic_type"],
        "properties": {"topic_type": {"enum": _TOPIC_ENUM}},
    },
    "draft": {
        "type": "object",
        "required": ["title", "introduction", "challenge", "options", "ending",
                     "persons_used", "places_used"],
        "properties": {
            "title": {"type": "string", "minLength": 1},
            "introduction": _TEXT_BLOCK,
            "challenge": _TEXT_BLOCK,
            "options": {
                "type": "array",
                "minItems": 2,
                "maxItems": 3,
                "items": {
                    "type": "object",
                    "required": ["desirable", "decision", "consequence"],
                    "properties": {
                        "desirable": {"type": "boolean"},
                        "decision": _TEXT_BLOCK,
                        "consequence": _CUED_BLOCK,
                        "repair": {
                            "type": "object",
                            "required": ["text", "speaker"],
                            "properties": {
                                "text": {"type": "string", "minLength": 1},
                                "speaker": {"type": "string"},
                            },
                        },
                        "response": _TEXT_BLOCK,
                        "repaired_consequence": _CUED_BLOCK,
                    },
                },
            },
            "ending": _TEXT_BLOCK,
            "persons_used": {"type": "array", "items": {"type": "string"}},
            "places_used": {"type": "array", "items": {"type": "string"}},
        },
    },
    "judgment": {
        "type": "object",
        "required": ["pass", "rationale"],
        "properties": {"pass": {"type": "boolean"}, "rationale": {"type": "string"}},
    },
    "refined": {
        "type": "object",
        "required": ["text"],
        "properties": {"text": {"type": "string", "minLength": 1}},
    },
    "translation": {
        "type": "object",
        "required": ["sections"],
        "properties": {
            "sections": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "translation"],
                    "properties": {
                        "id": {"type": "string"},
                        "translation": {"type": "string", "minLength": 1},
                    },
                },
            },
        },
    },
    "scenes": {
        "type": "object",
        "required": ["scenes", "roster"],
        "properties": {
            "scenes": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["section_id", "description", "required_entities"],
                    "properties": {
                        "section_id": {"type": "string"},
                        "description": {"type": "string", "minLength": 1},
                        "required_entities": {"type": "array", "items": {"type": "string"}},
                    },
                },
            },
            "roster": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "kind"],
                    "properties": {
                        "name": {"type": "string", "minLength": 1},
                        "kind": {"enum": ["person", "object", "place"]},
                    },
                },
            },
        },
    },
    "assignment": {
        "type": "object",
        "required": ["entities"],
        "properties": {
            "entities": {"type": "array", "items": {"type": "string"}},
            "removals": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "reason"],
                    "properties": {
                        "name": {"type": "string"},
                        "reason": {"type": "string"},
                    },
                },
            },
        },
    },
    "entity_descriptions": {
        "type": "object",
        "required": ["entities"],
        "properties": {
            "entities": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "kind", "appearance"],
                    "properties": {
                        "name": {"type": "string"},
                        "kind": {"enum": ["person", "object", "place"]},
                        "appearance": {"type": "string"},
                        "outfit_context": {"type": ["string", "null"]},
                    },
                },
            },
        },
    },
}


def parse_response(schema_id: str, response: Any) -> dict:
    """Validate a provider response against its stage schema; strict by design."""
    schema = RESPONSE_SCHEMAS[schema_id]
    if not isinstance(response, dict):
        raise ResponseParseError(f"{schema_id}: response is not an object")
    try:
        jsonschema.validate(response, schema)
    except jsonschema.ValidationError as err:
        raise ResponseParseError(f"{schema_id}: {err.message}") from err
    return response
