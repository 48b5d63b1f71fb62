"""Privacy and accuracy measures.

Symmetric (sMAPE-style) measures are bounded in [0, 1] and define 0/0 as 0.
The original MAPE-style measures divide by the raw value only; they are
unbounded and return an undefined result when that denominator is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aggregate import aggregate
from .core import AggregationFunction
from .errors import InvalidInput


@dataclass(frozen=True)
class ErrorValue:
    value: float
    defined: bool = True
    convention: bool = False  # True when the 0/0 rule produced the value

    def __float__(self) -> float:
        return self.value

    @classmethod
    def undefined(cls) -> "ErrorValue":
        return cls(math.nan, defined=False)


def _sym(a: float, b: float) -> float:
    den = abs(a) + abs(b)
    if den == 0.0:
        return 0.0
    return abs(a - b) / den


def symmetric_terms(a, b) -> np.ndarray:
    """Elementwise |a - b| / (|a| + |b|), 0 where both are 0. NaN propagates."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    den = np.abs(a) + np.abs(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(a - b) / den
    return np.where(den == 0.0, 0.0, out)


def local_error_term(r: float, s: float) -> ErrorValue:
    r, s = float(r), float(s)
    return ErrorValue(_sym(r, s), convention=(r == 0.0 and s == 0.0))


def _aligned(raw, summarized) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(raw, dtype=float).ravel()
    s = np.asarray(summarized, dtype=float).ravel()
    if r.size != s.size:
        raise InvalidInput(f"length mismatch: {r.size} raw vs {s.size} summarized values")
    if r.size == 0:
        raise InvalidInput("need at least one supplier")
    return r, s


def local_error(raw: Sequence[float], summarized: Sequence[float]) -> ErrorValue:
    """Mean symmetric deviation between each supplier's raw and summarized value."""
    r, s = _aligned(raw, summarized)
    terms = [_sym(float(a), float(b)) for a, b in zip(r, s)]
    conv = bool(np.any((r == 0.0) & (s == 0.0)))
    return ErrorValue(math.fsum(terms) / len(terms), convention=conv)


def global_error(raw: Sequence[float], summarized: Sequence[float],
                 alpha: AggregationFunction | str = AggregationFunction.MEAN) -> ErrorValue:
    """Symmetric error between the aggregates of raw and summarized data.

    For ungrouped data the mean's 1/n factor cancels, so both aggregation
    kinds are evaluated on the totals and agree bit for bit.
    """
    AggregationFunction.parse(alpha)
    r, s = _aligned(raw, summarized)
    kind = AggregationFunction.SUM
    return global_error_from_aggregates(aggregate(r, kind), aggregate(s, kind))


def global_error_from_aggregates(raw_aggregate: float, reported_aggregate: float) -> ErrorValue:
    """Symmetric error between the true aggregate and the one the consumer sees."""
    a, b = float(raw_aggregate), float(reported_aggregate)
    return ErrorValue(_sym(a, b), convention=(a == 0.0 and b == 0.0))


def local_group_error(r: float, group_aggregate: float) -> ErrorValue:
    """Deviation between one member's raw value and its group's aggregate."""
    r, g = float(r), float(group_aggregate)
    return ErrorValue(_sym(r, g), convention=(r == 0.0 and g == 0.0))


def total_group_error(summarized: Sequence[float], group_aggregate: float) -> ErrorValue:
    """Sum over members of the symmetric deviation of their summarized value from
    the group aggregate. Lies in [0, |G|]."""
    s = np.asarray(summarized, dtype=float).ravel()
    if s.size == 0:
        raise InvalidInput("total group error needs a non-empty group")
    g = float(group_aggregate)
    return ErrorValue(math.fsum(_sym(float(v), g) for v in s),
                      convention=bool(g == 0.0 and np.any(s == 0.0)))


def total_group_error_per_member(summarized: Sequence[float], group_aggregate: float) -> ErrorValue:
    tot = total_group_error(summarized, group_aggregate)
    return ErrorValue(tot.value / len(summarized), convention=tot.convention)


def mape_term(r: float, s: float) -> ErrorValue:
    r, s = float(r), float(s)
    if r == 0.0:
        return ErrorValue.undefined()
    return ErrorValue(abs(r - s) / abs(r))


def mape_local_error(raw: Sequence[float], summarized: Sequence[float]) -> ErrorValue:
    r, s = _aligned(raw, summarized)
    if np.any(r == 0.0):
        return ErrorValue.undefined()
    return ErrorValue(math.fsum(np.abs(r - s) / np.abs(r)) / r.size)


def mape_global_error(raw: Sequence[float], summarized: Sequence[float],
                      alpha: AggregationFunction | str = AggregationFunction.MEAN) -> ErrorValue:
    AggregationFunction.parse(alpha)
    r, s = _aligned(raw, summarized)
    # the mean's 1/n cancels, as for the symmetric version
    a, b = aggregate(r, AggregationFunction.SUM), aggregate(s, AggregationFunction.SUM)
    if a == 0.0:
        return ErrorValue.undefined()
    return ErrorValue(abs(a - b) / abs(a))


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson correlation, or None when either input has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise InvalidInput(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise InvalidInput("correlation needs at least two time steps")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(np.dot(dx, dx)))
    sy = math.sqrt(float(np.dot(dy, dy)))
    # relative threshold: a constant series centred in floating point leaves ~1 ulp residue
    if sx <= 1e-12 * max(1.0, float(np.max(np.abs(x)))) * math.sqrt(x.size) or \
            sy <= 1e-12 * max(1.0, float(np.max(np.abs(y)))) * math.sqrt(y.size):
        return None
    p = float(np.dot(dx, dy)) / (sx * sy)
    return min(1.0, max(-1.0, p))


def pearson_rows(x, y) -> np.ndarray:
    """Row-wise :func:`pearson` for (rows, T) arrays; NaN cells are skipped
    pairwise and undefined rows come back as NaN."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2:
        raise InvalidInput(f"need two (rows, T) arrays of equal shape, got {x.shape} and {y.shape}")
    both = np.isfinite(x) & np.isfinite(y)
    x = np.where(both, x, 0.0)
    y = np.where(both, y, 0.0)
    cnt = both.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dx = np.where(both, x - (x.sum(axis=1) / cnt)[:, None], 0.0)
        dy = np.where(both, y - (y.sum(axis=1) / cnt)[:, None], 0.0)
        sx = np.sqrt((dx * dx).sum(axis=1))
        sy = np.sqrt((dy * dy).sum(axis=1))
        root = np.sqrt(cnt)
        flat_x = sx <= 1e-12 * np.maximum(1.0, np.abs(x).max(axis=1, initial=0.0)) * root
        flat_y = sy <= 1e-12 * np.maximum(1.0, np.abs(y).max(axis=1, initial=0.0)) * root
        p = (dx * dy).sum(axis=1) / (sx * sy)
    p = np.clip(p, -1.0, 1.0)
    return np.where(flat_x | flat_y | (cnt < 2), np.nan, p)


def privacy_correlation(member_series: Sequence[float], group_series: Sequence[float]) -> ErrorValue:
    """1 - Pearson(member, group aggregate) over an epoch; in [0, 2].

    0 means the group series has exactly the member's shape. Undefined when
    either series is constant.
    """
    p = pearson(member_series, group_series)
    if p is None:
        return ErrorValue.undefined()
    return ErrorValue(1.0 - p)


__all__ = [
    "ErrorValue",
    "global_error",
    "global_error_from_aggregates",
    "local_error",
    "local_error_term",
    "local_group_error",
    "mape_global_error",
    "mape_local_error",
    "mape_term",
    "pearson",
    "pearson_rows",
    "privacy_correlation",
    "symmetric_terms",
    "total_group_error",
    "total_group_error_per_member",
]
