"""YAML run configurations for the command-line tool.

Parsing is strict: unknown top-level keys are rejected, probability vectors
must already be normalized (nothing is rescaled silently), and errors carry
the config-file line or the offending field name.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
import yaml

from .chain import FiniteChain, WeightFunction
from .errors import ParseError, ValidationError
from .renewal import IncrementDistribution


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}", path=path) from exc
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(
            f"malformed YAML: {exc.problem}",
            path=path,
            line=None if mark is None else mark.line + 1,
            column=None if mark is None else mark.column + 1,
        ) from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed YAML: {exc}", path=path) from exc
    if not isinstance(data, dict):
        raise ParseError("config root must be a mapping", path=path)
    return data


def require(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise ParseError(f"missing required field '{key}'", field=f"{where}.{key}")
    return cfg[key]


def reject_unknown(cfg: dict, allowed, where: str = "config"):
    extra = sorted(set(cfg) - set(allowed))
    if extra:
        raise ParseError(f"unknown field(s) {extra}", field=where)


def parse_scalar(value, field: str, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field must be a number, got {value!r}", field=field)
    out = kind(value)
    if kind is int and out != value:
        raise ParseError(f"field must be an integer, got {value!r}", field=field)
    if kind is float and not math.isfinite(out):
        raise ParseError(f"field must be finite, got {value!r}", field=field)
    return out


def parse_vector(value, field: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ParseError("field must be a nonempty list of numbers", field=field)
    return np.array([parse_scalar(v, field) for v in value], dtype=float)


def parse_increments(cfg: dict, field: str = "increments") -> IncrementDistribution:
    probs = parse_vector(require(cfg, field), field)
    try:
        return IncrementDistribution(probs)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=field) from exc


def parse_chain(cfg: dict, field: str = "chain") -> FiniteChain:
    block = require(cfg, field)
    if not isinstance(block, dict):
        raise ParseError("field must be a mapping with a 'matrix' entry", field=field)
    reject_unknown(block, {"matrix", "states"}, field)
    rows = require(block, "matrix", field)
    if not isinstance(rows, list) or not rows:
        raise ParseError("matrix must be a nonempty list of rows", field=f"{field}.matrix")
    matrix = np.array(
        [list(parse_vector(r, f"{field}.matrix[{i}]")) for i, r in enumerate(rows)], dtype=float
    )
    states = block.get("states")
    try:
        return FiniteChain(matrix, states=states)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=f"{field}.matrix") from exc


def parse_weights(cfg: dict, chain: FiniteChain, field: str = "weights") -> WeightFunction:
    values = parse_vector(require(cfg, field), field)
    if values.shape[0] != chain.n_states:
        raise ValidationError(
            f"weights have length {values.shape[0]}, chain has {chain.n_states} states",
            field=field,
        )
    try:
        return WeightFunction(values)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=field) from exc


def parse_state_set(cfg: dict, chain: FiniteChain, field: str):
    value = require(cfg, field)
    if not isinstance(value, list) or not value:
        raise ParseError("field must be a nonempty list of states", field=field)
    try:
        chain.indices(value)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=field) from exc
    return value


def optional_int(cfg: dict, key: str, default: Optional[int]) -> Optional[int]:
    if key not in cfg or cfg[key] is None:
        return default
    return parse_scalar(cfg[key], key, int)


def optional_float(cfg: dict, key: str, default: Optional[float]) -> Optional[float]:
    if key not in cfg or cfg[key] is None:
        return default
    return parse_scalar(cfg[key], key)
