"""Run configuration: one YAML file per run.

    scenario: bargmann-witness
    seed: 7
    parameters: {M: 1.0}
    tolerances: {witness.gap: 1.0e-12}
    output: {dir: out/witness, csv: true, figures: true}

Unknown keys anywhere are errors.  Sampling scenarios need a seed, from the
file or from ``--seed``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import scenarios
from .tolerances import TOLERANCES

TOP_KEYS = {"scenario", "seed", "parameters", "tolerances", "output", "description"}
OUTPUT_KEYS = {"dir", "csv", "figures"}
OUT_ENV = "SSLAB_OUT"


class ConfigError(ValueError):
    """The configuration cannot be used; nothing was run."""


@dataclass
class RunConfig:
    scenario: str
    seed: int | None
    parameters: dict
    tolerances: dict = field(default_factory=dict)
    out_dir: Path = Path("sslab-out")
    csv: bool = True
    figures: bool = True
    description: str = ""


def _coerce(name: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"parameter {name!r} must be a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"parameter {name!r} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"parameter {name!r} must be a number")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"parameter {name!r} must be a list")
        return [_coerce(f"{name}[]", v, default[0]) for v in value] if default else value
    return value


def build(raw, seed_override: int | None = None, out_override: str | None = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    name = raw.get("scenario")
    if not isinstance(name, str):
        raise ConfigError("missing scenario name")
    try:
        sc = scenarios.get(name)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None

    params = dict(sc.defaults)
    given = raw.get("parameters") or {}
    if not isinstance(given, dict):
        raise ConfigError("parameters must be a mapping")
    bad = set(given) - set(sc.defaults)
    if bad:
        raise ConfigError(f"unknown parameters for {name}: {sorted(bad)}")
    for k, v in given.items():
        params[k] = _coerce(k, v, sc.defaults[k])

    seed = raw.get("seed")
    if seed_override is not None:
        seed = seed_override
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("seed must be a non-negative integer")
    if sc.sampling and seed is None:
        raise ConfigError(f"scenario {name} samples randomly and needs a seed")

    tols = raw.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise ConfigError("tolerances must be a mapping")
    bad = set(tols) - set(TOLERANCES)
    if bad:
        raise ConfigError(f"unknown tolerance ids: {sorted(bad)}")
    for k, v in tols.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ConfigError(f"tolerance {k!r} must be a non-negative number")

    out = raw.get("output") or {}
    if not isinstance(out, dict):
        raise ConfigError("output must be a mapping")
    bad = set(out) - OUTPUT_KEYS
    if bad:
        raise ConfigError(f"unknown output keys: {sorted(bad)}")
    out_dir = out_override or os.environ.get(OUT_ENV) or out.get("dir") or f"sslab-out/{name}"
    desc = raw.get("description", "")
    if not isinstance(desc, str):
        raise ConfigError("description must be a string")
    return RunConfig(name, seed, params, {k: float(v) for k, v in tols.items()}, Path(out_dir),
                     bool(out.get("csv", True)), bool(out.get("figures", True)), desc)


def load(path, seed_override: int | None = None, out_override: str | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from None
    return build(raw, seed_override, out_override)


def example_config(name: str) -> str:
    sc = scenarios.get(name)
    doc = {"scenario": name}
    if sc.sampling:
        doc["seed"] = 0
    if sc.defaults:
        doc["parameters"] = dict(sc.defaults)
    doc["output"] = {"dir": f"sslab-out/{name}", "csv": True, "figures": True}
    return yaml.safe_dump(doc, sort_keys=False)
