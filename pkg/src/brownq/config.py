"""JSON run configuration shared by all commands.

Layout::

    {
      "mu_p": {"atoms": ["-1", "1"], "weights": ["1/2", "1/2"]},
      "mu_q": {"atoms": [0, 1], "weights": ["1/2", "1/2"]},
      "seed": 0,
      "omega":  {"re_range": [-3, 3], "im_range": [-3, 3], "resolution": [400, 400], "refine": 4},
      "esd":    {"n": 2000},
      "greens": {"n": 1000, "replicas": 8, "points": [[0, 0.5]], "ladder": [0.2, 0.1, 0.05]},
      "verify": {"n": 2000, "distance": 0.05}
    }

Integers and ``"p/q"`` strings are exact; floats and decimal strings make a
measure numeric-only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .measures import AtomicMeasure


class ConfigError(ValueError):
    """Config problem with the offending location attached."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


SECTIONS = {"mu_p", "mu_q", "seed", "curve", "omega", "esd", "greens", "verify"}


@dataclass
class RunConfig:
    mu_p: AtomicMeasure
    mu_q: AtomicMeasure
    seed: int = 0
    sections: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def exact(self):
        return self.mu_p.exact and self.mu_q.exact

    def section(self, name):
        return dict(self.sections.get(name) or {})

    def echo(self):
        """Config as parsed, for embedding in outputs."""
        out = dict(self.raw)
        out["seed"] = self.seed
        return out


def _measure(d, name):
    if not isinstance(d, dict):
        raise ConfigError(name, "expected an object with 'atoms' and 'weights'")
    for key in ("atoms", "weights"):
        if key not in d:
            raise ConfigError(f"{name}.{key}", "missing")
        if not isinstance(d[key], list):
            raise ConfigError(f"{name}.{key}", "expected a list")
        for i, v in enumerate(d[key]):
            if isinstance(v, bool) or not isinstance(v, (int, float, str)):
                raise ConfigError(f"{name}.{key}[{i}]", f"not a number: {v!r}")
    try:
        return AtomicMeasure(d["atoms"], d["weights"])
    except (ValueError, TypeError, ZeroDivisionError) as err:
        raise ConfigError(name, str(err)) from None


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = sorted(set(data) - SECTIONS)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    for key in ("mu_p", "mu_q"):
        if key not in data:
            raise ConfigError(key, "missing")
    mu_p = _measure(data["mu_p"], "mu_p")
    mu_q = _measure(data["mu_q"], "mu_q")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed", "expected an unsigned 64-bit integer")
    sections = {}
    for key in SECTIONS - {"mu_p", "mu_q", "seed"}:
        if key in data:
            if not isinstance(data[key], dict):
                raise ConfigError(key, "expected an object")
            sections[key] = data[key]
    return RunConfig(mu_p, mu_q, seed, sections, data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}", err.msg) from None
    return parse_config(data)


def get_field(section: dict, name: str, kind, default, where: str):
    """Typed access to a section field, with a located error."""
    if name not in section:
        return default
    v = section[name]
    try:
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise TypeError
            return int(v)
        if kind is float:
            if isinstance(v, bool):
                raise TypeError
            return float(v)
        if kind == "pair":
            if not (isinstance(v, list) and len(v) == 2):
                raise TypeError
            return (float(v[0]), float(v[1]))
        if kind == "ipair":
            if isinstance(v, int) and not isinstance(v, bool):
                return (v, v)
            if not (isinstance(v, list) and len(v) == 2 and all(isinstance(t, int) for t in v)):
                raise TypeError
            return (v[0], v[1])
        if kind == "floats":
            if not isinstance(v, list) or any(isinstance(t, bool) for t in v):
                raise TypeError
            return [float(t) for t in v]
        if kind == "points":
            if not isinstance(v, list):
                raise TypeError
            return [complex(float(t[0]), float(t[1])) for t in v]
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"{where}.{name}", f"bad value {v!r}") from None
    return v
