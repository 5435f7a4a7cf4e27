"""Flat ``key = value`` configuration files.

One setting per line, ``#`` starts a comment, blank lines are ignored. Keys
are exactly the field names of :class:`ModelConfig` and :class:`RunSpec`::

    lexemes = 100
    cells = 8
    exponents = 6
    weight_positive = 0.7      # weight_negative is complemented if omitted
    evidence_sampling = all
    evidence_limit = none
    max_cycles = 200000
    shuffle_cells = none       # or a comma list such as 0,3

When only one of ``weight_positive``/``weight_negative`` is given (in the file,
or in the overrides, which are applied last), the other is set to its
complement.
"""

from __future__ import annotations

from dataclasses import fields
from enum import Enum
from pathlib import Path

from .core import (
    ConfigError,
    EmptyEvidencePolicy,
    EvidenceSampling,
    FocusSampling,
    ModelConfig,
    PivotSampling,
    TiePolicy,
)
from .experiment import RunSpec


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _parse_bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(conv):
    def parse(text: str):
        return None if text.lower() in ("", "none") else conv(text)
    return parse


def _cell_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _seed(text: str) -> int:
    return int(text, 0)


MODEL_KEYS = {
    "lexemes": int,
    "cells": int,
    "exponents": int,
    "pivot_count": int,
    "evidence_limit": _optional(int),
    "weight_positive": float,
    "weight_negative": float,
    "zipf_exponent_lexemes": float,
    "zipf_exponent_cells": float,
    "focus_sampling": FocusSampling,
    "pivot_sampling": PivotSampling,
    "evidence_sampling": EvidenceSampling,
    "tie_policy": TiePolicy,
    "empty_evidence_policy": EmptyEvidencePolicy,
    "seed": _seed,
}

RUN_KEYS = {
    "max_cycles": int,
    "checkpoint_interval": int,
    "shuffle_replicates": int,
    "stop_on_absorption": _parse_bool,
    "shuffle_cells": _optional(_cell_list),
}

KEYS = {**MODEL_KEYS, **RUN_KEYS}

assert set(MODEL_KEYS) == {f.name for f in fields(ModelConfig)}
assert set(RUN_KEYS) == {f.name for f in fields(RunSpec)} - {"model"}


def parse_lines(lines, source: str = "<config>") -> dict[str, tuple[str, int]]:
    """Raw ``key -> (value, line number)`` mapping; later lines win."""
    out = {}
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'key = value', got {raw.strip()!r}", n, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigParseError("empty key", n, source)
        out[key] = (value, n)
    return out


def parse_override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigParseError(f"override must be key=value, got {text!r}", source="--set")
    key, value = (part.strip() for part in text.split("=", 1))
    return key, value


def _convert(raw: dict[str, tuple[str, int | None]], source: str) -> dict:
    values = {}
    for key, (text, line) in raw.items():
        if key not in KEYS:
            raise ConfigParseError(f"unknown key {key!r}", line, source)
        try:
            values[key] = KEYS[key](text)
        except ValueError as exc:
            raise ConfigParseError(f"bad value for {key}: {exc}", line, source) from None
    return values


def _complement_weights(values: dict, explicit: set[str]) -> None:
    given = explicit & {"weight_positive", "weight_negative"}
    if len(given) == 1:
        (key,) = given
        other = "weight_negative" if key == "weight_positive" else "weight_positive"
        values[other] = 1.0 - values[key]


def resolve(file_values: dict, overrides: dict) -> tuple[ModelConfig, RunSpec]:
    values = dict(file_values)
    values.update(overrides)
    if {"weight_positive", "weight_negative"} & set(overrides):
        _complement_weights(values, set(overrides))
    else:
        _complement_weights(values, set(file_values))
    model = ModelConfig(**{k: v for k, v in values.items() if k in MODEL_KEYS})
    try:
        spec = RunSpec(model, **{k: v for k, v in values.items() if k in RUN_KEYS})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return model, spec


def parse_text(text: str, overrides=(), source: str = "<config>") -> tuple[ModelConfig, RunSpec]:
    file_values = _convert(parse_lines(text.splitlines(), source), source)
    raw_over = {}
    for item in overrides:
        key, value = parse_override(item)
        raw_over[key] = (value, None)
    return resolve(file_values, _convert(raw_over, "--set"))


def parse_config(path, overrides=()) -> tuple[ModelConfig, RunSpec]:
    """Read a config file and apply ``key=value`` overrides last."""
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), overrides, source=str(path))


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def config_items(spec: RunSpec) -> list[tuple[str, str]]:
    """Every resolved key in canonical order, rendered as text."""
    items = [(k, _format_value(getattr(spec.model, k))) for k in MODEL_KEYS]
    items += [(k, _format_value(getattr(spec, k))) for k in RUN_KEYS]
    return items


def format_config(spec: RunSpec) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_items(spec))
