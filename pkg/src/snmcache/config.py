"""YAML experiment configs: parsing with field-path errors, round-trip, stable hashing.

Layout::

    model:
      lambda: 100.0
      time_unit: day
      profile: {kind: rectangular, lifespan: 30}
      volume: {kind: pareto, scale: 1.5, alpha: 2}
    numerics: {quad_rel_tol: 1.0e-9}
    experiment:
      name: hit-curve
      cache_sizes: [20, 50, 100, 200]
      ...

Unknown keys are rejected so typos surface as config errors.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, ModelError
from .model import SnmModel, profile_from_dict, volume_from_dict
from .numerics import NumericsConfig

EXPERIMENTS = ("g-curve", "hit-curve", "eviction-dist", "tandem", "validate")


@dataclass
class TandemBlock:
    t_c1: list = field(default_factory=lambda: [0.2, 0.4])
    t_c2: list = field(default_factory=lambda: [0.1, 0.5, 0.7, 0.9])
    age: float = 0.9
    volume: float = 2.0
    mc_samples: int = 0


@dataclass
class ExperimentBlock:
    name: str = "hit-curve"
    cache_sizes: list = field(default_factory=lambda: [20, 50, 100, 200])
    t_grid: list = field(default_factory=lambda: [float(t) for t in range(1, 121)])
    delta: float | None = None
    delta_min: float = 1e-3
    delta_max: float = 0.5
    delta_points: int = 32
    seeds: list = field(default_factory=lambda: [0])
    replications: int = 20
    samples: int = 1000
    ld_delta: float = 0.1
    warmup: float = 60.0
    window: float = 240.0
    simulate: bool = False
    validate_scale: float = 1.0
    output_dir: str = "out"
    tandem: TandemBlock = field(default_factory=TandemBlock)


@dataclass
class ExperimentConfig:
    model: SnmModel
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    experiment: ExperimentBlock = field(default_factory=ExperimentBlock)

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        exp = dataclasses.asdict(self.experiment)
        return {
            "model": self.model.to_dict(),
            "numerics": dataclasses.asdict(self.numerics),
            "experiment": exp,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None, width=100)

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; independent of key order in the source file.

        ``output_dir`` is excluded: where artifacts land does not change them.
        """
        d = self.to_dict()
        del d["experiment"]["output_dir"]
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @property
    def seed(self) -> int:
        return int(self.experiment.seeds[0])


def _take(d: dict, cls, path: str):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(d) - set(names)
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0], "unknown field")
    return names


def _coerce(value, default, path):
    if default is None or value is None:
        return None if value is None else float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "expected true/false")
        return value
    try:
        if isinstance(default, int):
            if float(value) != int(value):
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, str):
            return str(value)
        if isinstance(default, list):
            if not isinstance(value, list):
                raise ValueError
            return [float(v) if not isinstance(v, int) else v for v in value]
    except (TypeError, ValueError):
        raise ConfigError(path, f"invalid value {value!r}") from None
    return value


def _block(d: dict | None, cls, path: str):
    d = d or {}
    _take(d, cls, path)
    obj = cls()
    for f in dataclasses.fields(cls):
        if f.name not in d:
            continue
        sub = f"{path}.{f.name}"
        default = getattr(obj, f.name)
        if dataclasses.is_dataclass(default):
            setattr(obj, f.name, _block(d[f.name], type(default), sub))
        else:
            setattr(obj, f.name, _coerce(d[f.name], default, sub))
    return obj


def _validate_experiment(e: ExperimentBlock):
    if e.name not in EXPERIMENTS:
        raise ConfigError("experiment.name", f"must be one of {', '.join(EXPERIMENTS)}")
    sizes = e.cache_sizes
    if not sizes or any(c <= 0 for c in sizes):
        raise ConfigError("experiment.cache_sizes", "must be a non-empty list of positive sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("experiment.cache_sizes", "must be strictly increasing")
    if any(t <= 0 for t in e.t_grid):
        raise ConfigError("experiment.t_grid", "times must be > 0")
    if e.delta is not None and not 0 < e.delta < 1:
        raise ConfigError("experiment.delta", "must lie in (0, 1)")
    if not 0 < e.delta_min < e.delta_max < 1 or e.delta_points < 1:
        raise ConfigError("experiment.delta_min", "need 0 < delta_min < delta_max < 1 and delta_points >= 1")
    if not e.seeds or any(int(s) != s for s in e.seeds):
        raise ConfigError("experiment.seeds", "must be a non-empty list of integers")
    for name in ("replications", "samples"):
        if getattr(e, name) < 1:
            raise ConfigError(f"experiment.{name}", "must be >= 1")
    if not 0 < e.ld_delta < 1:
        raise ConfigError("experiment.ld_delta", "must lie in (0, 1)")
    if e.warmup < 0 or e.window <= 0:
        raise ConfigError("experiment.window", "need warmup >= 0 and window > 0")
    if e.validate_scale <= 0:
        raise ConfigError("experiment.validate_scale", "must be > 0")


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("", "config root must be a mapping")
    unknown = set(d) - {"model", "numerics", "experiment"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    m = d.get("model")
    if not isinstance(m, dict):
        raise ConfigError("model", "missing or not a mapping")
    unknown = set(m) - {"lambda", "time_unit", "profile", "volume"}
    if unknown:
        raise ConfigError(f"model.{sorted(unknown)[0]}", "unknown field")
    for key in ("lambda", "profile", "volume"):
        if key not in m:
            raise ConfigError(f"model.{key}", "required")
    try:
        profile = profile_from_dict(m["profile"])
    except (ModelError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("model.profile", str(exc)) from None
    try:
        volume = volume_from_dict(m["volume"])
    except (ModelError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("model.volume", str(exc)) from None
    try:
        model = SnmModel(float(m["lambda"]), profile, volume, str(m.get("time_unit", "day")))
    except (ModelError, TypeError, ValueError) as exc:
        raise ConfigError("model.lambda", str(exc)) from None

    nd = d.get("numerics") or {}
    _take(nd, NumericsConfig, "numerics")
    try:
        numerics = NumericsConfig(**{k: type(getattr(NumericsConfig(), k))(v) for k, v in nd.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError("numerics", str(exc)) from None

    exp = _block(d.get("experiment"), ExperimentBlock, "experiment")
    _validate_experiment(exp)
    return ExperimentConfig(model, numerics, exp)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"YAML parse error: {exc}") from None
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(cfg.to_yaml())


def with_overrides(cfg: ExperimentConfig, **changes: Any) -> ExperimentConfig:
    """Copy with experiment-block fields replaced (``None`` values are ignored)."""
    changes = {k: v for k, v in changes.items() if v is not None}
    exp = dataclasses.replace(cfg.experiment, **changes)
    _validate_experiment(exp)
    return ExperimentConfig(cfg.model, cfg.numerics, exp)
