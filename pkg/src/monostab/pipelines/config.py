"""Experiment configuration: a JSON file validated against a schema before any work starts."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

EXPERIMENTS = ("LengthCurve", "Dilate1D", "Dilate2D", "Pocket", "Marginal", "StripOrbit",
               "WellsLambda", "ExteriorRadial", "LiebSuite", "StarGeom")
RANDOMIZED = ("LiebSuite",)

REACTION_SCHEMA = {
    "type": "object",
    "required": ["family", "params"],
    "properties": {
        "family": {"enum": ["Logistic", "Cubic", "DoubleHump", "Interpolated"]},
        "params": {"type": "object"},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["experiment"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "reaction": REACTION_SCHEMA,
        "geometry": {"type": "object"},
        "h": {"type": "number", "exclusiveMinimum": 0},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    reaction: dict | None = None
    geometry: dict = field(default_factory=dict)
    h: float | None = None
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None

    def to_dict(self) -> dict:
        d = {"experiment": self.experiment}
        for k in ("reaction", "geometry", "h", "tolerances", "params", "seed", "output"):
            v = getattr(self, k)
            if v is not None and v != {}:
                d[k] = copy.deepcopy(v)
        return d

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def param(self, name: str, default=None):
        return self.params.get(name, default)


def validate(d: dict) -> None:
    try:
        jsonschema.validate(d, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    if d["experiment"] in RANDOMIZED and "seed" not in d:
        raise ConfigError(f"{d['experiment']} is randomized and needs a seed")


def from_dict(d: dict) -> ExperimentConfig:
    validate(d)
    d = copy.deepcopy(d)
    return ExperimentConfig(
        experiment=d["experiment"],
        reaction=d.get("reaction"),
        geometry=d.get("geometry", {}),
        h=d.get("h"),
        tolerances=d.get("tolerances", {}),
        params=d.get("params", {}),
        seed=d.get("seed"),
        output=d.get("output"),
    )


def load(path: str | Path, seed: int | None = None) -> ExperimentConfig:
    d = json.loads(Path(path).read_text())
    if seed is not None:
        d["seed"] = seed
    return from_dict(d)
