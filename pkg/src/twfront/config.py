"""Problem configuration files.

A configuration is a YAML (or JSON, which YAML accepts) mapping::

    p: 2.0            # required, > 1
    theta: 0.5        # required, in (0, 1)
    diffusion:        # D(u) = d0 u**alpha (1 - u)**beta
      d0: 1.0
      alpha: 0.0
      beta: 0.0
    reaction:         # g(u) = g0 (u - theta)**sigma (1 - u)**gamma on (theta, 1)
      g0: 2.0
      sigma: 1.0
      gamma: 1.0
    convection:       # h(u) = coeffs[0] + coeffs[1] u + ...
      coeffs: [0.0]

Every section is optional and falls back to the defaults shown (g0 defaults to 1).
Errors carry the dotted key at fault.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Mapping

import yaml

from .exceptions import ConfigError, DomainError
from .model import ConvectionSpec, DiffusionSpec, Exponents, Problem, ReactionSpec

SCHEMA = {
    "p": None,
    "theta": None,
    "diffusion": {"d0": 1.0, "alpha": 0.0, "beta": 0.0},
    "reaction": {"g0": 1.0, "sigma": 1.0, "gamma": 1.0},
    "convection": {"coeffs": [0.0]},
}


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", key)
    return value


def _section(data: Mapping, name: str) -> dict:
    defaults = SCHEMA[name]
    raw = data.get(name, {})
    if raw is None:
        raw = {}
    if not isinstance(raw, Mapping):
        raise ConfigError(f"expected a mapping, got {type(raw).__name__}", name)
    for k in raw:
        if k not in defaults:
            raise ConfigError(f"unknown key (allowed: {', '.join(defaults)})", f"{name}.{k}")
    out = {}
    for k, default in defaults.items():
        key = f"{name}.{k}"
        v = raw.get(k, default)
        if k == "coeffs":
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                v = [v]
            if not isinstance(v, (list, tuple)) or not v:
                raise ConfigError(f"expected a non-empty list of numbers, got {v!r}", key)
            out[k] = [_number(c, f"{key}[{i}]") for i, c in enumerate(v)]
        else:
            out[k] = _number(v, key)
    return out


def resolve(data: Any) -> dict:
    """Validate a raw mapping and fill defaults; returns the fully resolved configuration."""
    if not isinstance(data, Mapping):
        raise ConfigError(f"top level must be a mapping, got {type(data).__name__}", "<root>")
    for k in data:
        if k not in SCHEMA:
            raise ConfigError(f"unknown key (allowed: {', '.join(SCHEMA)})", str(k))
    out: dict = {}
    for k in ("p", "theta"):
        if k not in data:
            raise ConfigError("required key is missing", k)
        out[k] = _number(data[k], k)
    for name in ("diffusion", "reaction", "convection"):
        out[name] = _section(data, name)
    return out


def build_problem(cfg: Mapping) -> Problem:
    """Problem from a resolved configuration; domain errors are reported against their key."""
    d, r, c = cfg["diffusion"], cfg["reaction"], cfg["convection"]
    parts = {}
    for key, make in (
        ("p", lambda: Exponents(cfg["p"])),
        ("diffusion", lambda: DiffusionSpec(d0=d["d0"], alpha=d["alpha"], beta=d["beta"])),
        ("reaction", lambda: ReactionSpec(theta=cfg["theta"], g0=r["g0"], sigma=r["sigma"], gamma=r["gamma"])),
        ("convection", lambda: ConvectionSpec(coeffs=tuple(c["coeffs"]))),
    ):
        try:
            parts[key] = make()
        except DomainError as exc:
            raise ConfigError(str(exc), _blame(key, str(exc))) from exc
    return Problem(
        exponents=parts["p"], diffusion=parts["diffusion"], reaction=parts["reaction"], convection=parts["convection"]
    )


def _blame(section: str, message: str) -> str:
    if section == "reaction" and message.startswith("theta"):
        return "theta"
    for field in ("d0", "g0", "sigma", "gamma", "alpha", "beta"):
        if f".{field}" in message or message.startswith(field):
            return f"{section}.{field}"
    return section


def loads(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "<document>"
        raise ConfigError(f"not valid YAML/JSON: {getattr(exc, 'problem', exc)}", where) from exc
    return resolve(data)


def load(path) -> tuple[Problem, dict]:
    """Read, validate and build; returns the problem and the resolved configuration."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "--config") from exc
    cfg = loads(text)
    return build_problem(cfg), cfg


def dumps(cfg: Mapping) -> str:
    return yaml.safe_dump(dict(cfg), sort_keys=False)
