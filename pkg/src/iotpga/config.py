"""Experiment configuration: a flat YAML (or JSON) mapping of documented keys."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import yaml

from .core import AggregationFunction
from .errors import ConfigError, InvalidParameter
from .grouping import GroupingStrategy, SizeKind
from .ingest import DatasetFormat


class ExperimentKind(str, Enum):
    MACRO = "macro"
    PAIR_GRID = "pair_grid"
    INCENTIVE = "incentive"
    STRATEGY = "strategy"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind = ExperimentKind.MACRO
    name: str = ""
    aggregation: AggregationFunction = AggregationFunction.MEAN
    master_seed: int = 0
    seeds: int = 10
    k_max: int = 10
    epochs: int | None = None          # use only the first N epochs; None = all

    # dataset
    dataset: str = "synthetic"         # "synthetic" or a file path
    dataset_format: DatasetFormat = DatasetFormat.SYNTHETIC
    availability_threshold: float = 0.95
    synthetic_profile: str = "daily_load"
    synthetic_suppliers: int = 200
    synthetic_epochs: int = 10
    synthetic_series_length: int = 48
    synthetic_trip_law: str = "poisson:4"
    synthetic_seed: int = 0

    # macro sweep
    group_sizes: tuple[int, ...] = (1, 2, 5, 10, 20)
    distribution: SizeKind = SizeKind.FIXED
    gamma: float = 2.0
    k: int = 10

    # pair grid
    k1_levels: tuple[int, ...] = tuple(range(1, 10))
    k2_levels: tuple[int, ...] = tuple(range(1, 10))
    pair_group_size: int = 2

    # incentive grid (uses group_sizes too)
    k_levels: tuple[int, ...] = tuple(range(1, 11))

    # strategy sweep
    groups: tuple[int, ...] = (20, 60, 100)
    std_targets: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)
    strategies: tuple[GroupingStrategy, ...] = tuple(GroupingStrategy)
    compare_std: float = 2.0
    k_init: int = 10
    k_min: int = 1
    dispersion_k_max: int = 19
    max_steps: int = 100_000

    def __post_init__(self):
        if self.seeds < 1:
            raise ConfigError("seeds must be >= 1")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        for name in ("group_sizes", "k1_levels", "k2_levels", "k_levels", "groups",
                     "std_targets", "strategies"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must not be empty")
        if any(g < 1 for g in self.group_sizes):
            raise ConfigError("group_sizes must be >= 1 (1 is the no-groups baseline)")
        for name in ("k1_levels", "k2_levels", "k_levels"):
            if any(k < 1 for k in getattr(self, name)):
                raise ConfigError(f"{name} must be >= 1")
        if self.pair_group_size < 2:
            raise ConfigError("pair_group_size must be >= 2")
        if any(m < 1 for m in self.groups):
            raise ConfigError("groups must be >= 1")
        if any(s < 0 for s in self.std_targets):
            raise ConfigError("std_targets must be >= 0")
        if not self.k_min <= self.k_init <= self.dispersion_k_max:
            raise ConfigError("need k_min <= k_init <= dispersion_k_max")

    def as_dict(self) -> dict[str, Any]:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = [x.value if isinstance(x, Enum) else x for x in v]
            out[k] = v
        return out

    def digest(self) -> str:
        canon = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def with_seed(self, master_seed: int) -> "ExperimentConfig":
        return from_mapping({**self.as_dict(), "master_seed": master_seed})


_ENUMS = {
    "experiment": ExperimentKind,
    "aggregation": AggregationFunction,
    "dataset_format": DatasetFormat,
    "distribution": SizeKind,
}
_INT_LISTS = {"group_sizes", "k1_levels", "k2_levels", "k_levels", "groups"}
_FLOAT_LISTS = {"std_targets"}
_INTS = {"master_seed", "seeds", "k_max", "synthetic_suppliers", "synthetic_epochs",
         "synthetic_series_length", "synthetic_seed", "k", "pair_group_size",
         "k_init", "k_min", "dispersion_k_max", "max_steps"}
_FLOATS = {"availability_threshold", "gamma", "compare_std"}


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in _ENUMS:
            return _ENUMS[key](value)
        if key == "strategies":
            return tuple(GroupingStrategy.parse(v) for v in _as_list(value))
        if key in _INT_LISTS:
            return tuple(_as_int(v) for v in _as_list(value))
        if key in _FLOAT_LISTS:
            return tuple(float(v) for v in _as_list(value))
        if key in _INTS:
            return _as_int(value)
        if key in _FLOATS:
            return float(value)
        if key == "epochs":
            return None if value is None else _as_int(value)
        return str(value)
    except (TypeError, ValueError, InvalidParameter) as exc:
        raise ConfigError(f"key '{key}': invalid value {value!r} ({exc})") from None


def _as_list(value: Any) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return [value]


def _as_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("booleans are not integers")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError("not an integer")
    return int(value)


def from_mapping(data: Mapping[str, Any]) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in data.items()})


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {getattr(exc, 'problem', None) or exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping of keys")
    try:
        return from_mapping(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
