"""Experiment configuration: a single nested JSON document per experiment.

Every command stamps a copy of the fully resolved configuration beside its
outputs so results stay attributable to the settings that produced them.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .benchmarks import get_function, registry_list
from .observe import ObservationSpec
from .ppo import PpoConfig


class ConfigError(ValueError):
    pass


@dataclass
class TrainingSection:
    mode: str = "single"            # "single" | "multi"
    function: str | None = "Sphere"
    dimension: int | None = 10
    episodes: int = 5000
    retries: int = 3


@dataclass
class TestSection:
    runs: int = 50
    generations: int = 50
    population: int = 10


@dataclass
class ExperimentConfig:
    algorithm: str = "de"           # "de" | "cmaes"
    action: str = "de_uniform"
    observation: ObservationSpec = field(default_factory=ObservationSpec)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    training: TrainingSection = field(default_factory=TrainingSection)
    test: TestSection = field(default_factory=TestSection)
    sigma0: float = 0.5
    seed: int = 0
    out: str = "results/experiment"

    def function_set(self) -> list:
        if self.training.mode == "multi":
            return registry_list()
        if self.training.function is None or self.training.dimension is None:
            raise ConfigError("single-function training requires function and dimension")
        fn = get_function(self.training.function, self.training.dimension)
        return [(fn.name, fn.dimension)]

    def validate(self) -> None:
        if self.algorithm not in ("de", "cmaes"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "cmaes" and self.action != "cma_sigma":
            raise ConfigError("cmaes requires the cma_sigma action space")
        if self.algorithm == "de" and self.action == "cma_sigma":
            raise ConfigError("de requires a DE action space")
        if self.training.episodes <= 0 or self.test.runs <= 0:
            raise ConfigError("budgets must be positive")
        self.function_set()  # resolves against the registry


def _build(cls, data: dict, label: str):
    fields = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in {label}: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {label} section: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    sections = {
        "observation": ObservationSpec,
        "ppo": PpoConfig,
        "training": TrainingSection,
        "test": TestSection,
    }
    kwargs = {}
    for key, value in data.items():
        if key in sections:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            if key == "ppo" and "hidden" in value:
                value = {**value, "hidden": tuple(value["hidden"])}
            kwargs[key] = _build(sections[key], value, key)
        else:
            kwargs[key] = value
    cfg = _build(ExperimentConfig, kwargs, "experiment")
    cfg.validate()
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    doc = asdict(cfg)
    doc["ppo"]["hidden"] = list(doc["ppo"]["hidden"])
    return doc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
