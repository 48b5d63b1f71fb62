"""Group-size sampling and grouping strategies."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import GroupPartition, SummarizationPolicy, SupplierId
from .errors import InvalidParameter


class SizeKind(str, Enum):
    FIXED = "fixed"
    UNIFORM = "uniform"
    POWERLAW = "powerlaw"
    STEP = "step"


class GroupingStrategy(str, Enum):
    RANDOM = "random"
    DATA_PROXIMITY = "data_proximity"
    SUMMARIZATION_PROXIMITY = "summarization_proximity"

    @classmethod
    def parse(cls, kind: "GroupingStrategy | str") -> "GroupingStrategy":
        try:
            return cls(kind)
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise InvalidParameter(f"unknown strategy {kind!r}; choose from {choices}") from None


@dataclass(frozen=True)
class SizeDistribution:
    """Distribution of group sizes with maximum ``N``.

    fixed: always N. uniform: 2..N equally likely. powerlaw: p(s) ~ s**-gamma
    on 2..N. step: 2 or N with probability 1/2 each.
    """

    kind: SizeKind
    N: int
    gamma: float = 2.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", SizeKind(self.kind))
        except ValueError:
            raise InvalidParameter(f"unknown size distribution {self.kind!r}") from None
        if int(self.N) != self.N or self.N < 2:
            raise InvalidParameter(f"maximum group size N must be an integer >= 2, got {self.N!r}")
        if not self.gamma > 0:
            raise InvalidParameter(f"power-law exponent must be > 0, got {self.gamma}")

    def support(self) -> np.ndarray:
        if self.kind is SizeKind.FIXED:
            return np.array([self.N])
        if self.kind is SizeKind.STEP:
            return np.unique([2, self.N])
        return np.arange(2, self.N + 1)

    def pmf(self) -> np.ndarray:
        s = self.support()
        if self.kind is SizeKind.POWERLAW:
            w = s.astype(float) ** (-self.gamma)
            return w / w.sum()
        return np.full(s.size, 1.0 / s.size)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        s = self.support()
        if s.size == 1:
            return np.full(size, s[0], dtype=int)
        return rng.choice(s, size=size, p=self.pmf())


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_sizes(dist: SizeDistribution, population: int, seed=None) -> list[int]:
    """Draw group sizes until they cover ``population``; the last draw is cut
    short so the sizes sum to ``population`` exactly."""
    if population < 2:
        raise InvalidParameter(f"population must be >= 2, got {population}")
    rng = _rng(seed)
    # every size is >= 2, so population // 2 + 1 draws always suffice
    draws = dist.draw(rng, population // 2 + 1)
    cum = np.cumsum(draws)
    last = int(np.searchsorted(cum, population))
    sizes = [int(v) for v in draws[: last + 1]]
    sizes[-1] -= int(cum[last]) - population
    return sizes


def balanced_sizes(population: int, m: int) -> list[int]:
    if m < 1 or m > population:
        raise InvalidParameter(f"number of groups must be in [1, {population}], got {m}")
    q, r = divmod(population, m)
    return [q + 1] * r + [q] * (m - r)


def _mean_key(values) -> float:
    return float(np.mean(np.asarray(values, dtype=float)))


def strategy_order(
    suppliers: Sequence[SupplierId],
    strategy: GroupingStrategy | str,
    epoch_data: Mapping[SupplierId, Sequence[float]] | None = None,
    policies: SummarizationPolicy | Mapping[SupplierId, int] | None = None,
    seed=None,
    data_key: Callable[[Sequence[float]], float] = _mean_key,
) -> list[SupplierId]:
    """Order in which suppliers are chunked into consecutive groups."""
    strategy = GroupingStrategy.parse(strategy)
    suppliers = list(suppliers)
    if strategy is GroupingStrategy.RANDOM:
        perm = _rng(seed).permutation(len(suppliers))
        return [suppliers[i] for i in perm]
    if strategy is GroupingStrategy.DATA_PROXIMITY:
        if epoch_data is None:
            raise InvalidParameter("data proximity grouping needs the epoch's raw data")
        keys = {s: data_key(epoch_data[s]) for s in suppliers}
    else:
        if policies is None:
            raise InvalidParameter("summarization proximity grouping needs the policies")
        keys = {s: policies[s] for s in suppliers}
    return sorted(suppliers, key=lambda s: (keys[s], s))


def chunk(order: Sequence[SupplierId], sizes: Sequence[int], epoch: int = 0) -> GroupPartition:
    groups = []
    pos = 0
    for size in sizes:
        groups.append(tuple(order[pos:pos + size]))
        pos += size
    return GroupPartition(tuple(groups), epoch=epoch)


def partition(
    suppliers: Sequence[SupplierId],
    sizes: Sequence[int],
    strategy: GroupingStrategy | str = GroupingStrategy.RANDOM,
    epoch_data: Mapping[SupplierId, Sequence[float]] | None = None,
    policies: SummarizationPolicy | Mapping[SupplierId, int] | None = None,
    seed=None,
    epoch: int = 0,
    data_key: Callable[[Sequence[float]], float] = _mean_key,
) -> GroupPartition:
    """Split ``suppliers`` into consecutive groups of the given sizes.

    random shuffles first; data_proximity sorts by ``data_key`` of each
    supplier's raw epoch series (the mean by default); summarization_proximity
    sorts by cluster count. Sort ties fall back to the supplier id.
    """
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise InvalidParameter(f"group sizes must be positive, got {sizes}")
    if sum(sizes) != len(suppliers):
        raise InvalidParameter(f"sizes sum to {sum(sizes)} but there are {len(suppliers)} suppliers")
    if len(set(suppliers)) != len(suppliers):
        raise InvalidParameter("supplier list has duplicates")
    order = strategy_order(suppliers, strategy, epoch_data, policies, seed, data_key)
    return chunk(order, sizes, epoch=epoch)


def equal_partition(
    suppliers: Sequence[SupplierId],
    m: int,
    strategy: GroupingStrategy | str = GroupingStrategy.RANDOM,
    epoch_data: Mapping[SupplierId, Sequence[float]] | None = None,
    policies: SummarizationPolicy | Mapping[SupplierId, int] | None = None,
    seed=None,
    epoch: int = 0,
) -> GroupPartition:
    """``m`` groups whose sizes differ by at most one."""
    sizes = balanced_sizes(len(suppliers), m)
    return partition(suppliers, sizes, strategy, epoch_data, policies, seed, epoch)


def singletons(suppliers: Sequence[SupplierId], epoch: int = 0) -> GroupPartition:
    """No-grouping baseline: every supplier is its own group."""
    return GroupPartition(tuple((s,) for s in suppliers), epoch=epoch)


def labels_from_sizes(sizes: Sequence[int]) -> np.ndarray:
    """Group index of each position of a chunked ordering."""
    return np.repeat(np.arange(len(sizes)), sizes)


__all__ = [
    "GroupingStrategy",
    "SizeDistribution",
    "SizeKind",
    "balanced_sizes",
    "chunk",
    "equal_partition",
    "labels_from_sizes",
    "partition",
    "sample_sizes",
    "singletons",
    "strategy_order",
]
