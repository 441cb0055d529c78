"""Published JSON Schemas for wire formats consumed by external clients."""

SCENARIO_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "airrisk/scenario.schema.json",
    "title": "Scenario",
    "type": "object",
    "properties": {
        "description": {"type": "string"},
        "overrides": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "source": {"type": "string", "minLength": 1},
                    "steps": {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 0},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "mode": {"enum": ["set", "mul"]},
                    "value": {"type": "number"},
                },
                "required": ["source", "steps", "mode", "value"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["overrides"],
    "additionalProperties": False,
}
