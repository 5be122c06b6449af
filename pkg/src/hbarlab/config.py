"""Run configurations: JSON schema, defaults and validation with JSON-pointer errors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from jsonschema import Draft202012Validator

from .errors import ConfigError

SUBCOMMANDS = ("check", "explode", "moyal", "fuzzy", "planck", "field")
FORMATS = ("csv", "json")

_num_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_int_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 1}


def _params(props: dict) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props}


PARAMETER_SCHEMAS = {
    "check": _params({
        "model": {"type": "string"},
        "n": _count,
        "tol": _pos,
        "zero_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "forms": {"type": "boolean"},
    }),
    "explode": _params({
        "map": {"type": ["string", "object"]},
        "samples": _count,
        "tol": _pos,
    }),
    "moyal": _params({
        "hbar": {"type": "array", "items": _pos, "minItems": 1},
        "ev0_hbar": {"type": "array", "items": _pos, "minItems": 3},
        "n_points": {"type": "integer", "minimum": 8},
        "tol": _pos,
        "ev0_tol": _pos,
    }),
    "fuzzy": _params({
        "k_list": _int_list,
        "hbar": _num_list,
        "symbol": {"type": "string"},
        "expect_order": {"type": "number"},
        "order_tol": _pos,
    }),
    "planck": _params({
        "model": {"type": "string"},
        "profile_file": {"type": "string"},
        "min_hbar": _pos,
        "scan_step": _pos,
        "ratio": {"type": "boolean"},
    }),
    "field": _params({
        "backend": {"enum": ["fuzzy", "moyal"]},
        "symbol": {"type": "string"},
        "second": {"type": "string"},
        "k_max": _count,
        "k_list": _int_list,
        "hbar": {"type": "array", "items": _pos, "minItems": 1},
        "case": {"enum": ["function", "flat_V"]},
        "n_points": {"type": "integer", "minimum": 8},
        "fit_window": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
    }),
}

DEFAULTS = {
    "check": {"model": "constant-pi", "n": 10_000, "zero_fraction": 0.1, "forms": False},
    "explode": {"map": "squash", "samples": 32, "tol": 1e-6},
    "moyal": {"hbar": [0.5, 1.0, 2.0], "ev0_hbar": [0.2, 0.1, 0.05], "n_points": 64, "tol": 1e-6, "ev0_tol": 1e-3},
    "fuzzy": {"k_list": [4, 8, 16, 32], "symbol": "z", "order_tol": 0.2},
    "planck": {"model": "fibonacci", "min_hbar": 1e-3, "scan_step": 0.01, "ratio": False},
    "field": {"backend": "fuzzy", "symbol": "z", "case": "flat_V", "n_points": 64},
}

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hbarlab run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["subcommand"],
    "properties": {
        "subcommand": {"enum": list(SUBCOMMANDS)},
        "parameters": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "format": {"enum": list(FORMATS)},
    },
    "allOf": [
        {"if": {"properties": {"subcommand": {"const": name}}, "required": ["subcommand"]},
         "then": {"properties": {"parameters": schema}}}
        for name, schema in PARAMETER_SCHEMAS.items()
    ],
}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "hbarlab-out"
    format: str = "csv"

    def resolved(self) -> dict:
        """Parameters with defaults filled in."""
        out = dict(DEFAULTS.get(self.subcommand, {}))
        out.update(self.parameters)
        return out


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def schema_errors(doc) -> list[tuple[str, str]]:
    """All schema violations as ``(json_pointer, message)``, sorted by pointer."""
    v = Draft202012Validator(RUN_SCHEMA)
    errs = []
    for e in v.iter_errors(doc):
        if e.validator in ("allOf", "if", "then"):
            continue
        errs.append((_pointer(e.absolute_path), e.message))
    return sorted(set(errs))


def semantic_errors(cfg: RunConfig) -> list[tuple[str, str]]:
    """Rules the schema cannot express."""
    errs = []
    p = cfg.parameters
    if cfg.subcommand in ("fuzzy", "field") and "hbar" in p and p.get("backend", "fuzzy") == "fuzzy":
        for i, h in enumerate(p["hbar"]):
            k = round(1 / h) if h > 0 else 0
            if k < 1 or abs(1 / h - k) > 1e-9 * k:
                errs.append((f"/parameters/hbar/{i}",
                             f"hbar = {h} violates the Bohr-Sommerfeld condition on the sphere: "
                             "1/hbar must be a positive integer"))
    if cfg.subcommand == "fuzzy" and "hbar" in p and "k_list" in p:
        errs.append(("/parameters", "give either k_list or hbar, not both"))
    if cfg.subcommand == "planck" and "profile_file" in p and "model" in p:
        errs.append(("/parameters", "give either model or profile_file, not both"))
    if cfg.subcommand == "field" and "fit_window" in p and p["fit_window"][0] > p["fit_window"][1]:
        errs.append(("/parameters/fit_window", "lower end exceeds upper end"))
    return errs


def parse_config(doc) -> RunConfig:
    errs = schema_errors(doc)
    if errs:
        raise ConfigError("; ".join(f"{ptr or '/'}: {msg}" for ptr, msg in errs), errs[0][0])
    cfg = RunConfig(doc["subcommand"], dict(doc.get("parameters", {})), doc.get("seed", 0),
                    doc.get("output_dir", "hbarlab-out"), doc.get("format", "csv"))
    errs = semantic_errors(cfg)
    if errs:
        raise ConfigError("; ".join(f"{ptr}: {msg}" for ptr, msg in errs), errs[0][0])
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e.msg} at line {e.lineno}") from e
    return parse_config(doc)
