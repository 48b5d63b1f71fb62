"""Direct and group-level aggregation.

The consumer applies the same function to the group reports that the groups
apply to their members (mean of means, sum of sums). With unequal group sizes
the mean of means weights each supplier by 1/(m * |G_j|) instead of 1/n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import AggregationFunction, GroupPartition, SupplierId
from .errors import InvalidInput, InvalidParameter


def aggregate(values: Sequence[float], kind: AggregationFunction | str = AggregationFunction.MEAN) -> float:
    kind = AggregationFunction.parse(kind)
    vals = [float(v) for v in np.asarray(values, dtype=float).ravel()]
    if not vals:
        raise InvalidInput("cannot aggregate an empty collection")
    total = math.fsum(vals)
    return total / len(vals) if kind is AggregationFunction.MEAN else total


@dataclass(frozen=True)
class GroupAggregate:
    per_group: tuple[float, ...]
    composed: float
    direct: float


def group_aggregate(partition: GroupPartition, values: Mapping[SupplierId, float],
                    kind: AggregationFunction | str = AggregationFunction.MEAN) -> GroupAggregate:
    """Aggregate inside every group, then aggregate the group results."""
    kind = AggregationFunction.parse(kind)
    if not partition.covers(values.keys()):
        raise InvalidInput("partition does not cover exactly the suppliers with values")
    per_group = tuple(aggregate([values[s] for s in g.members], kind) for g in partition.groups)
    return GroupAggregate(
        per_group=per_group,
        composed=aggregate(per_group, kind),
        direct=aggregate(list(values.values()), kind),
    )


def distributed_share(group_value: float, group_size: int,
                      kind: AggregationFunction | str = AggregationFunction.SUM) -> tuple[float, ...]:
    """Per-member reports in the distributed organization of a group.

    Under sum every member sends alpha_G / |G| so the consumer's sum of the
    reports rebuilds alpha_G; under mean every member sends alpha_G itself.
    """
    kind = AggregationFunction.parse(kind)
    if group_size < 1:
        raise InvalidParameter(f"group size must be >= 1, got {group_size}")
    share = group_value / group_size if kind is AggregationFunction.SUM else float(group_value)
    return (share,) * group_size


def recombine_shares(reports: Sequence[Sequence[float]],
                     kind: AggregationFunction | str = AggregationFunction.SUM) -> float:
    """Consumer side of :func:`distributed_share`: rebuild each group value, then compose."""
    kind = AggregationFunction.parse(kind)
    return aggregate([aggregate(r, kind) for r in reports], kind)


# ---------------------------------------------------------------------------
# vectorized form used by the experiment harness

@dataclass(frozen=True)
class AggregationOutcome:
    direct: np.ndarray        # (T,) alpha over all active suppliers
    per_group: np.ndarray     # (m, T) alpha_G, NaN where a group has no active member
    counts: np.ndarray        # (m, T) active members per group
    composed: np.ndarray      # (T,) alpha over the group values


def _as_matrix(values) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidInput("expected a (suppliers, time steps) matrix")
    mask = np.isfinite(x)
    return np.where(mask, x, 0.0), mask


def aggregate_epoch(values, labels: Sequence[int], m: int | None = None,
                    kind: AggregationFunction | str = AggregationFunction.MEAN) -> AggregationOutcome:
    """Direct, per-group and composed aggregates for every time step of an epoch.

    ``values`` is (n, T); NaN marks a supplier without a measurement at that
    step. ``labels[i]`` is the group index of row i. Sums accumulate in
    extended precision so composed and direct results agree to a few ulps;
    with equal group sizes the composed mean is the direct mean bit for bit.
    """
    kind = AggregationFunction.parse(kind)
    x, mask = _as_matrix(values)
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape != (x.shape[0],):
        raise InvalidInput(f"need one group label per supplier, got {labels.shape} for {x.shape[0]}")
    if labels.size and labels.min() < 0:
        raise InvalidInput("group labels must be non-negative")
    m = int(labels.max()) + 1 if m is None else int(m)

    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    present = np.unique(sorted_labels)
    starts = np.searchsorted(sorted_labels, present)

    ext = x[order].astype(np.longdouble)
    sums = np.zeros((m, x.shape[1]), dtype=np.longdouble)
    sums[present] = np.add.reduceat(ext, starts, axis=0)
    counts = np.zeros((m, x.shape[1]), dtype=np.intp)
    counts[present] = np.add.reduceat(mask[order].astype(np.intp), starts, axis=0)

    total = ext.sum(axis=0)
    n_active = mask.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is AggregationFunction.MEAN:
            per_group = (sums / counts).astype(float)
            direct = (total / n_active).astype(float)
        else:
            per_group = sums.astype(float)
            direct = total.astype(float)
        valid = counts > 0
        per_group = np.where(valid, per_group, np.nan)
        group_total = np.where(valid, per_group, 0.0).astype(np.longdouble).sum(axis=0)
        if kind is AggregationFunction.MEAN:
            composed = (group_total / valid.sum(axis=0)).astype(float)
            # equal active counts: the grand mean is the direct mean exactly,
            # so take the single-division form rather than rounding twice
            big = np.iinfo(np.intp).max
            equal = np.where(valid, counts, big).min(axis=0) == np.where(valid, counts, 0).max(axis=0)
            composed = np.where(equal, direct, composed)
        else:
            composed = group_total.astype(float)
    direct = np.where(n_active > 0, direct, np.nan)
    composed = np.where(n_active > 0, composed, np.nan)
    return AggregationOutcome(direct=direct, per_group=per_group, counts=counts, composed=composed)


def grand_mean_weights(sizes: Sequence[int]) -> np.ndarray:
    """Effective weight of each supplier in the mean of group means."""
    sizes = np.asarray(sizes, dtype=int)
    if sizes.size == 0 or np.any(sizes < 1):
        raise InvalidInput("group sizes must be positive")
    return np.repeat(1.0 / (sizes.size * sizes), sizes)


__all__ = [
    "AggregationOutcome",
    "GroupAggregate",
    "aggregate",
    "aggregate_epoch",
    "distributed_share",
    "grand_mean_weights",
    "group_aggregate",
    "recombine_shares",
]
