"""Run-configuration schemas and validation.

Configs are JSON files validated before any compute; unknown keys and
out-of-range values are rejected with a pointed message.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import BadConfig
from .presets import VARIANTS

__all__ = ["TRAIN_SCHEMA", "BENCH_SCHEMA", "load_config", "validate_config"]

_HYPERPARAMS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["lr", "weight_decay", "hidden", "layers_or_blocks", "dropout", "optimizer"],
    "properties": {
        "lr": {"type": "number", "exclusiveMinimum": 0},
        "weight_decay": {"type": "number", "minimum": 0},
        "hidden": {"type": "integer", "minimum": 1},
        "layers_or_blocks": {"type": "integer", "minimum": 1},
        "dropout": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "optimizer": {"enum": ["adam", "rmsprop"]},
        "max_episodes": {"type": "integer", "minimum": 1},
        "patience": {"type": "integer", "minimum": 0},
    },
}

TRAIN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dataset", "variant", "split"],
    "properties": {
        "dataset": {"type": "string", "minLength": 1},
        "variant": {"enum": list(VARIANTS)},
        "split": {"type": "string", "pattern": r"^(public|[0-9]*\.?[0-9]+%)$"},
        "validation": {"type": "boolean"},
        "preset": {"type": "boolean"},
        "hyperparams": _HYPERPARAMS_SCHEMA,
        "n_runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "width_cap": {"type": ["integer", "null"], "minimum": 1},
        "deterministic": {"type": "boolean"},
        "out": {"type": "string"},
        "dump_embeddings": {"type": "boolean"},
    },
}

BENCH_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["cells"],
    "properties": {
        "cells": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["dataset", "variant", "split"],
                "properties": {
                    "dataset": {"type": "string", "minLength": 1},
                    "variant": {"enum": list(VARIANTS)},
                    "split": {"type": "string", "pattern": r"^(public|[0-9]*\.?[0-9]+%)$"},
                    "validation": {"type": "boolean"},
                },
            },
        },
        "n_runs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "width_cap": {"type": ["integer", "null"], "minimum": 1},
        "deterministic": {"type": "boolean"},
        "out": {"type": "string"},
    },
}


def validate_config(cfg: dict, schema: dict) -> dict:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise BadConfig(f"config invalid at {where}: {first.message}")
    if schema is TRAIN_SCHEMA:
        if not cfg.get("preset", False) and "hyperparams" not in cfg:
            raise BadConfig(
                "config must set \"preset\": true or provide a \"hyperparams\" object"
            )
    return cfg


def load_config(path, schema: dict) -> dict:
    path = Path(path)
    if not path.is_file():
        raise BadConfig(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise BadConfig("config root must be a JSON object")
    return validate_config(cfg, schema)
