"""Domain types shared by the summarization, grouping and aggregation code.

Indices (epoch, time step) are 0-based inside the library. Anything written
to disk or emitted as a :class:`MetricRecord` is 1-based.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import InvalidInput, InvalidParameter

SupplierId = Union[str, int]

DEFAULT_K_MIN = 1
DEFAULT_K_MAX = 10


@dataclass(frozen=True)
class SupplierSeries:
    """Raw measurements of one supplier during one epoch."""

    supplier: SupplierId
    epoch: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.epoch < 0:
            raise InvalidParameter(f"epoch must be >= 0, got {self.epoch}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def key(self) -> tuple[SupplierId, int]:
        return (self.supplier, self.epoch)


@dataclass(frozen=True)
class SummarizedSeries:
    """Centroid-substituted version of a :class:`SupplierSeries`."""

    supplier: SupplierId
    epoch: int
    values: tuple[float, ...]
    centroids: tuple[float, ...]
    k: int

    def __len__(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class SummarizationPolicy:
    """Cluster count ``k`` chosen by each supplier (summarization level 1/k)."""

    levels: Mapping[SupplierId, int]
    k_min: int = DEFAULT_K_MIN
    k_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        if self.k_min < 1 or self.k_max < self.k_min:
            raise InvalidParameter(f"bad level bounds [{self.k_min}, {self.k_max}]")
        levels = {s: int(k) for s, k in self.levels.items()}
        for s, k in levels.items():
            if not self.k_min <= k <= self.k_max:
                raise InvalidParameter(
                    f"supplier {s!r}: k={k} outside [{self.k_min}, {self.k_max}]"
                )
        object.__setattr__(self, "levels", MappingProxyType(levels))

    @classmethod
    def uniform(cls, suppliers: Iterable[SupplierId], k: int,
                k_min: int = DEFAULT_K_MIN, k_max: int = DEFAULT_K_MAX) -> "SummarizationPolicy":
        return cls({s: k for s in suppliers}, k_min=k_min, k_max=k_max)

    def __getitem__(self, supplier: SupplierId) -> int:
        return self.levels[supplier]

    def __contains__(self, supplier: object) -> bool:
        return supplier in self.levels

    def __len__(self) -> int:
        return len(self.levels)

    def replace(self, updates: Mapping[SupplierId, int]) -> "SummarizationPolicy":
        merged = dict(self.levels)
        merged.update(updates)
        return SummarizationPolicy(merged, k_min=self.k_min, k_max=self.k_max)

    def values_array(self, order: Sequence[SupplierId] | None = None) -> np.ndarray:
        keys = list(self.levels) if order is None else order
        return np.array([self.levels[s] for s in keys], dtype=int)

    def std(self) -> float:
        """Sample standard deviation of the levels (0 for fewer than 2 suppliers)."""
        ks = self.values_array()
        if ks.size < 2:
            return 0.0
        return float(np.std(ks, ddof=1))


@dataclass(frozen=True)
class Group:
    members: tuple[SupplierId, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidInput("a group needs at least one member")
        if len(set(members)) != len(members):
            raise InvalidInput(f"duplicate members in group {members!r}")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint cover of the active supplier set for one epoch."""

    groups: tuple[Group, ...]
    epoch: int = 0

    def __post_init__(self):
        groups = tuple(g if isinstance(g, Group) else Group(tuple(g)) for g in self.groups)
        if not groups:
            raise InvalidInput("a partition needs at least one group")
        seen: set = set()
        for g in groups:
            overlap = seen.intersection(g.members)
            if overlap:
                raise InvalidInput(f"groups overlap on {sorted(map(str, overlap))}")
            seen.update(g.members)
        object.__setattr__(self, "groups", groups)

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def suppliers(self) -> frozenset:
        return frozenset(s for g in self.groups for s in g.members)

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def covers(self, suppliers: Iterable[SupplierId]) -> bool:
        return self.suppliers == frozenset(suppliers)

    def labels(self, order: Sequence[SupplierId]) -> np.ndarray:
        """Group index of each supplier in ``order``."""
        where = {s: j for j, g in enumerate(self.groups) for s in g.members}
        try:
            return np.array([where[s] for s in order], dtype=np.intp)
        except KeyError as exc:
            raise InvalidInput(f"supplier {exc.args[0]!r} is not in the partition") from None


class AggregationFunction(str, Enum):
    MEAN = "mean"
    SUM = "sum"

    @classmethod
    def parse(cls, kind: "AggregationFunction | str") -> "AggregationFunction":
        try:
            return cls(kind)
        except ValueError:
            raise InvalidParameter(f"unknown aggregation {kind!r}; use 'mean' or 'sum'") from None


@dataclass(frozen=True)
class MetricRecord:
    experiment: str
    seed: int
    epoch: int | None
    t: int | None
    metric: str
    value: float
    defined: bool = True
    context: Mapping[str, object] = field(default_factory=dict)


@dataclass
class ValidationReport:
    duplicates: list[tuple[SupplierId, int]] = field(default_factory=list)
    bad_values: list[tuple[SupplierId, int, int]] = field(default_factory=list)
    empty: list[tuple[SupplierId, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.duplicates or self.bad_values or self.empty)


def validate_dataset(series: Iterable[SupplierSeries]) -> ValidationReport:
    """Report duplicate (supplier, epoch) keys, non-finite values and empty series.

    Never raises; callers decide whether a non-empty report is fatal.
    """
    report = ValidationReport()
    counts: Counter = Counter()
    for s in series:
        counts[s.key] += 1
        if len(s.values) == 0:
            report.empty.append(s.key)
        for t, v in enumerate(s.values):
            if not math.isfinite(v):
                report.bad_values.append((s.supplier, s.epoch, t))
    report.duplicates = [key for key, c in counts.items() if c > 1]
    return report
