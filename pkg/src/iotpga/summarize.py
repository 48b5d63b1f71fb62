"""Exact one-dimensional k-means summarization and summarization-level transfers.

Optimal 1D k-means clusters are contiguous runs of the sorted values, so the
global optimum is found by dynamic programming over the distinct values
(weighted by multiplicity). No initialization, no iteration, no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_K_MAX,
    DEFAULT_K_MIN,
    SummarizationPolicy,
    SummarizedSeries,
    SupplierId,
    SupplierSeries,
)
from .errors import InsufficientData, InvalidInput, InvalidParameter


@dataclass(frozen=True)
class CentroidSet:
    centroids: np.ndarray   # strictly increasing
    assignment: np.ndarray  # centroid index for each input position

    @property
    def k(self) -> int:
        return int(self.centroids.size)

    def substitute(self) -> np.ndarray:
        return self.centroids[self.assignment]


def _as_values(values) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InvalidInput("expected a one-dimensional sequence of values")
    if x.size == 0:
        raise InvalidInput("cannot summarize an empty series")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("series contains non-finite values")
    return x


def _segment_costs(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """cost[j, i] = weighted SSE of distinct values j..i (inf below the diagonal)."""
    c1 = np.concatenate(([0.0], np.cumsum(w)))
    c2 = np.concatenate(([0.0], np.cumsum(w * v)))
    c3 = np.concatenate(([0.0], np.cumsum(w * v * v)))
    hi = np.arange(1, v.size + 1)
    s1 = c1[hi][None, :] - c1[:-1][:, None]
    s2 = c2[hi][None, :] - c2[:-1][:, None]
    s3 = c3[hi][None, :] - c3[:-1][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = s3 - s2 * s2 / s1
    cost = np.maximum(cost, 0.0)
    cost[np.tri(v.size, k=-1, dtype=bool)] = np.inf
    return cost


def _dp_breaks(v: np.ndarray, w: np.ndarray, k_max: int) -> list[list[int]]:
    """Block start indices (into ``v``) of the optimal clustering for k = 1..k_max.

    Requires k_max <= v.size. Ties between equal-cost splits go to the
    earliest split point.
    """
    K = v.size
    cost = _segment_costs(v, w)
    best = [cost[0].copy()]           # best[c-1][i]: c clusters over v[0..i]
    split: list[np.ndarray | None] = [None]
    for c in range(2, k_max + 1):
        prev = best[-1]
        # candidate last block starts at j (1..K-1), preceded by c-1 clusters on v[0..j-1]
        total = prev[:-1][:, None] + cost[1:, :]
        j_best = np.argmin(total, axis=0)
        best.append(total[j_best, np.arange(K)])
        split.append(j_best + 1)
    out = []
    for c in range(1, k_max + 1):
        starts = []
        i = K - 1
        for cc in range(c, 1, -1):
            j = int(split[cc - 1][i])
            starts.append(j)
            i = j - 1
        starts.append(0)
        out.append(starts[::-1])
    return out


def _centroid_set(x: np.ndarray, v: np.ndarray, starts: list[int]) -> CentroidSet:
    # block membership by value range, then centroid = mean of the member points
    bounds = v[starts[1:]] if len(starts) > 1 else np.empty(0)
    block = np.searchsorted(bounds, x, side="right")
    centroids = np.bincount(block, weights=x) / np.bincount(block)
    # nearest centroid, exact midpoint ties to the lower one
    mids = (centroids[:-1] + centroids[1:]) / 2.0
    assignment = np.searchsorted(mids, x, side="left")
    return CentroidSet(centroids=centroids, assignment=assignment)


def kmeans_1d(values, k: int) -> CentroidSet:
    """Globally optimal k-means clustering of 1D data.

    If ``k`` is at least the number of distinct values, every distinct value is
    its own centroid.
    """
    return kmeans_1d_levels(values, [k])[k]


def kmeans_1d_levels(values, ks: Sequence[int]) -> dict[int, CentroidSet]:
    """Optimal clusterings for several cluster counts from a single DP pass."""
    x = _as_values(values)
    return _levels(x, *np.unique(x, return_counts=True), ks)


def _levels(x: np.ndarray, v: np.ndarray, counts: np.ndarray, ks: Sequence[int]) -> dict[int, CentroidSet]:
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise InvalidParameter(f"cluster counts must be >= 1, got {ks}")
    K = v.size
    breaks = _dp_breaks(v, counts.astype(float), min(ks[-1], K))
    return {k: _centroid_set(x, v, breaks[min(k, K) - 1]) for k in ks}


def _check_k(k: int, length: int) -> None:
    if int(k) != k or k < 1:
        raise InvalidParameter(f"k must be a positive integer, got {k!r}")
    if k > length:
        raise InsufficientData(f"series has {length} points, fewer than k={k}")


def summarize_values(values, k: int) -> np.ndarray:
    """Replace every value by its nearest optimal centroid."""
    x = _as_values(values)
    _check_k(k, x.size)
    v, counts = np.unique(x, return_counts=True)
    if k >= v.size:
        return x.copy()
    return _levels(x, v, counts, [k])[k].substitute()


def summarize_all_levels(values, k_max: int) -> dict[int, np.ndarray]:
    """Summaries for k = 1..min(k_max, len(values))."""
    x = _as_values(values)
    top = min(int(k_max), x.size)
    if top < 1:
        raise InvalidParameter(f"k_max must be >= 1, got {k_max}")
    v, counts = np.unique(x, return_counts=True)
    sets = _levels(x, v, counts, range(1, top + 1))
    distinct = v.size
    return {k: (x.copy() if k >= distinct else cs.substitute()) for k, cs in sets.items()}


def summarize(raw: SupplierSeries, k: int) -> SummarizedSeries:
    x = _as_values(raw.values)
    _check_k(k, x.size)
    if k >= np.unique(x).size:
        out, cents = x, np.unique(x)
    else:
        cs = kmeans_1d(x, k)
        out, cents = cs.substitute(), cs.centroids
    return SummarizedSeries(
        supplier=raw.supplier,
        epoch=raw.epoch,
        values=tuple(float(v) for v in out),
        centroids=tuple(float(c) for c in cents),
        k=int(k),
    )


def within_cluster_sse(values, summarized) -> float:
    x = np.asarray(values, dtype=float)
    s = np.asarray(summarized, dtype=float)
    return float(np.sum((x - s) ** 2))


# ---------------------------------------------------------------------------
# summarization-level transfers


def transfer_centroids(
    policy: SummarizationPolicy,
    pair: tuple[SupplierId, SupplierId],
    amount: int = 1,
    gainer: int = 0,
    k_min: int | None = None,
    k_max: int | None = None,
) -> SummarizationPolicy:
    """Move ``amount`` cluster units from one member of ``pair`` to the other.

    ``gainer`` is the index (0 or 1) within ``pair`` of the member whose k
    grows. A transfer that would push either member outside ``[k_min, k_max]``
    is rejected and the policy is returned unchanged.
    """
    if int(amount) != amount or amount < 1:
        raise InvalidParameter(f"transfer amount must be a positive integer, got {amount!r}")
    if gainer not in (0, 1):
        raise InvalidParameter(f"gainer must be 0 or 1, got {gainer!r}")
    a, b = pair
    for s in (a, b):
        if s not in policy:
            raise InvalidParameter(f"unknown supplier {s!r}")
    if a == b:
        raise InvalidParameter("a supplier cannot transfer to itself")
    lo = policy.k_min if k_min is None else k_min
    hi = policy.k_max if k_max is None else k_max
    up, down = (a, b) if gainer == 0 else (b, a)
    new_up = policy[up] + amount
    new_down = policy[down] - amount
    if not (lo <= new_up <= hi and lo <= new_down <= hi):
        return policy
    levels = dict(policy.levels)
    levels[up], levels[down] = new_up, new_down
    return SummarizationPolicy(levels, k_min=min(lo, policy.k_min), k_max=max(hi, policy.k_max))


def disperse_levels(
    policy: SummarizationPolicy,
    target_std: float,
    seed=None,
    max_steps: int = 100_000,
    k_min: int | None = None,
    k_max: int | None = None,
    amount: int = 1,
) -> tuple[SummarizationPolicy, float]:
    """Spread summarization levels by random pairwise transfers.

    Suppliers are shuffled into disjoint pairs; each pair performs one
    transfer in a coin-flipped direction. Rounds repeat until the sample
    standard deviation of the levels reaches ``target_std`` or ``max_steps``
    transfer attempts have been made. The sum of levels never changes.

    Returns the new policy and the standard deviation it achieved.
    """
    if target_std < 0:
        raise InvalidParameter(f"target_std must be >= 0, got {target_std}")
    lo = policy.k_min if k_min is None else k_min
    hi = policy.k_max if k_max is None else k_max
    rng = np.random.default_rng(seed)
    ids = list(policy.levels)
    ks = [policy[s] for s in ids]
    n = len(ks)
    if n < 2:
        return policy, 0.0

    total = sum(ks)
    sumsq = sum(k * k for k in ks)
    threshold = float(target_std) ** 2 * n * (n - 1)

    def reached() -> bool:
        return n * sumsq - total * total >= threshold

    steps = 0
    while not reached() and steps < max_steps:
        order = rng.permutation(n)
        flips = rng.integers(0, 2, size=n // 2)
        for p in range(n // 2):
            if steps >= max_steps:
                break
            steps += 1
            i, j = int(order[2 * p]), int(order[2 * p + 1])
            up, down = (i, j) if flips[p] == 0 else (j, i)
            new_up, new_down = ks[up] + amount, ks[down] - amount
            if not (lo <= new_up <= hi and lo <= new_down <= hi):
                continue
            sumsq += new_up * new_up + new_down * new_down - ks[up] ** 2 - ks[down] ** 2
            ks[up], ks[down] = new_up, new_down
            if reached():
                break

    out = SummarizationPolicy(
        dict(zip(ids, ks)), k_min=min(policy.k_min, lo), k_max=max(policy.k_max, hi)
    )
    achieved = float(np.sqrt(max(n * sumsq - total * total, 0) / (n * (n - 1))))
    return out, achieved


__all__ = [
    "CentroidSet",
    "DEFAULT_K_MAX",
    "DEFAULT_K_MIN",
    "disperse_levels",
    "kmeans_1d",
    "kmeans_1d_levels",
    "summarize",
    "summarize_all_levels",
    "summarize_values",
    "transfer_centroids",
    "within_cluster_sse",
]
