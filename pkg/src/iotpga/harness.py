"""Experiment families: group-size sweeps, pair grids, incentive grids and
grouping-strategy sweeps.

Seeding: replicate ``r`` gets ``seed = SeedSequence(master_seed,
spawn_key=(r,))`` reduced to a 32-bit integer. Every random choice inside a
replicate draws from ``SeedSequence(seed, spawn_key=(stream, *key))`` where
``stream`` names the purpose (sizes, partition, pairing, dispersion) and
``key`` is the epoch (plus the std target for dispersion). Cells of a grid
therefore share random numbers within a replicate, and each cell can be
recomputed in isolation from its record's seed and context.
"""

from __future__ import annotations

import csv
import json
import csv
import json
import logging
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from . import __version__
from .aggregate import aggregate_epoch
from .config import ExperimentConfig, ExperimentKind
from .core import AggregationFunction, MetricRecord, SummarizationPolicy, SupplierSeries
from .errors import InvalidInput, InvalidParameter
from .grouping import (
    GroupingStrategy,
    SizeDistribution,
    SizeKind,
    balanced_sizes,
    labels_from_sizes,
    sample_sizes,
)
from .ingest import DatasetFormat, detect_format, generate_synthetic, load_ecbt_like, load_nrel_like
from .metrics import pearson_rows, symmetric_terms
from .summarize import disperse_levels, summarize_all_levels

log = logging.getLogger(__name__)

STREAM_SIZES = 1
STREAM_PARTITION = 2
STREAM_PAIRING = 3
STREAM_DISPERSE = 4


def replicate_seed(master_seed: int, replicate: int) -> int:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def stream_rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, *map(int, key))))


# ---------------------------------------------------------------------------
# data layout


@dataclass(frozen=True)
class EpochPanel:
    """All series of one epoch as a NaN-padded (suppliers, T_max) matrix."""

    epoch: int
    suppliers: tuple[str, ...]
    raw: np.ndarray
    lengths: np.ndarray


def build_panels(series: Iterable[SupplierSeries], max_epochs: int | None = None) -> list[EpochPanel]:
    by_epoch: dict[int, list[SupplierSeries]] = defaultdict(list)
    for s in series:
        by_epoch[s.epoch].append(s)
    epochs = sorted(by_epoch)
    if max_epochs is not None:
        epochs = epochs[:max_epochs]
    panels = []
    for e in epochs:
        rows = sorted(by_epoch[e], key=lambda s: s.supplier)
        if len({s.supplier for s in rows}) != len(rows):
            raise InvalidInput(f"epoch {e + 1} has duplicate suppliers")
        lengths = np.array([len(s) for s in rows])
        raw = np.full((len(rows), int(lengths.max(initial=0))), np.nan)
        for i, s in enumerate(rows):
            raw[i, : len(s)] = s.values
        panels.append(EpochPanel(e, tuple(s.supplier for s in rows), raw, lengths))
    if not panels:
        raise InvalidInput("dataset has no series")
    return panels


class SummaryBank:
    """Summaries of every series for k = 1..k_max, computed once and shared."""

    def __init__(self, panels: Sequence[EpochPanel], k_max: int):
        self.panels = panels
        self.k_max = int(k_max)
        self._levels: dict[int, np.ndarray] = {}

    def _build(self, idx: int) -> np.ndarray:
        p = self.panels[idx]
        out = np.full((self.k_max,) + p.raw.shape, np.nan)
        for i, L in enumerate(p.lengths):
            for k, s in summarize_all_levels(p.raw[i, :L], self.k_max).items():
                out[k - 1, i, :L] = s
        return out

    def prepare(self) -> "SummaryBank":
        for idx in range(len(self.panels)):
            if idx not in self._levels:
                self._levels[idx] = self._build(idx)
        return self

    def rows(self, idx: int, ks: np.ndarray) -> np.ndarray:
        """Summaries of each supplier of panel ``idx`` at its own level ``ks[i]``."""
        if idx not in self._levels:
            self._levels[idx] = self._build(idx)
        ks = np.asarray(ks, dtype=int)
        if ks.size and (ks.min() < 1 or ks.max() > self.k_max):
            raise InvalidParameter(f"levels must lie in [1, {self.k_max}]")
        return self._levels[idx][ks - 1, np.arange(ks.size)]


# ---------------------------------------------------------------------------
# one epoch under one partition


def _group_sum(x: np.ndarray, labels: np.ndarray, m: int) -> np.ndarray:
    order = np.argsort(labels, kind="stable")
    sl = labels[order]
    present = np.unique(sl)
    out = np.zeros((m, x.shape[1]))
    out[present] = np.add.reduceat(x[order], np.searchsorted(sl, present), axis=0)
    return out


def _nanmean_rows(x: np.ndarray) -> np.ndarray:
    cnt = np.isfinite(x).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(cnt > 0, np.nansum(x, axis=0) / cnt, np.nan)


@dataclass
class EpochEval:
    """Per-time-step metrics of one epoch, plus the intermediates the pair grid needs."""

    metrics: dict[str, np.ndarray]
    group_values: np.ndarray
    group_counts: np.ndarray
    lge: np.ndarray


def evaluate_epoch(raw: np.ndarray, summ: np.ndarray, labels: np.ndarray, m: int,
                   kind: AggregationFunction) -> EpochEval:
    """Errors of one epoch for suppliers grouped by ``labels``.

    ``raw`` and ``summ`` are (n, T) with NaN for missing steps.
    """
    n = raw.shape[0]
    agg = aggregate_epoch(summ, labels, m, kind)
    raw_direct = aggregate_epoch(raw, np.zeros(n, dtype=np.intp), 1, kind).direct
    alpha_g = agg.per_group[labels]

    lge = symmetric_terms(raw, alpha_g)
    le = symmetric_terms(raw, summ)
    member = symmetric_terms(summ, alpha_g)
    valid = agg.counts > 0
    tge = np.where(valid, _group_sum(np.nan_to_num(member, nan=0.0), labels, m), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        tge_member = tge / agg.counts

    metrics = {
        "local_group_error": _nanmean_rows(lge),
        "local_error": _nanmean_rows(le),
        "global_error": symmetric_terms(raw_direct, agg.composed),
        "global_error_direct": symmetric_terms(raw_direct, agg.direct),
        "total_group_error": _nanmean_rows(tge),
        "total_group_error_member_mean": _nanmean_rows(tge_member),
    }
    return EpochEval(metrics, agg.per_group, agg.counts, lge)


# ---------------------------------------------------------------------------
# results


@dataclass
class ExperimentResult:
    experiment: str
    records: list[MetricRecord] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)
    sizes: list[dict] = field(default_factory=list)


def _emit(records: list, experiment: str, seed: int, epoch: int, metrics: dict[str, np.ndarray],
          context: dict) -> None:
    names = list(metrics)
    T = len(next(iter(metrics.values())))
    for t in range(T):
        for name in names:
            v = float(metrics[name][t])
            records.append(MetricRecord(experiment, seed, epoch + 1, t + 1, name, v,
                                        bool(np.isfinite(v)), context))


def _emit_epoch(records: list, experiment: str, seed: int, epoch: int | None, name: str,
                value: float, context: dict) -> None:
    v = float(value)
    records.append(MetricRecord(experiment, seed, None if epoch is None else epoch + 1, None,
                                name, v, bool(np.isfinite(v)), context))


_REPLICATE_KEYS = ("replicate",)


def summarize_records(experiment: str, records: Sequence[MetricRecord]) -> list[dict]:
    """Figure-level view: per replicate average over epochs and time steps,
    then mean and standard deviation across replicates."""
    per_rep: dict = defaultdict(lambda: defaultdict(list))
    for r in records:
        if not r.defined:
            continue
        ctx = tuple((k, v) for k, v in r.context.items() if k not in _REPLICATE_KEYS)
        per_rep[(r.metric, ctx)][r.seed].append(r.value)
    rows = []
    for (metric, ctx), by_seed in per_rep.items():
        means = np.array([np.mean(v) for v in by_seed.values()])
        rows.append({
            "experiment": experiment,
            "metric": metric,
            **dict(ctx),
            "mean": float(means.mean()),
            "std": float(means.std(ddof=1)) if means.size > 1 else 0.0,
            "replicates": int(means.size),
        })
    return rows


def _run_jobs(fn: Callable, jobs: Sequence, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def _eligible(panel: EpochPanel, k_needed: np.ndarray | int) -> np.ndarray:
    return np.flatnonzero(panel.lengths >= k_needed)


# ---------------------------------------------------------------------------
# experiment families


def run_macro_sweep(panels: Sequence[EpochPanel], bank: SummaryBank, *, group_sizes: Sequence[int],
                    distribution: SizeKind | str = SizeKind.FIXED, gamma: float = 2.0, k: int = 10,
                    seeds: int = 10, master_seed: int = 0,
                    aggregation: AggregationFunction | str = AggregationFunction.MEAN,
                    threads: int = 1) -> ExperimentResult:
    """Average privacy and accuracy for a grid of maximum group sizes ``N``.

    ``N = 1`` is the no-groups baseline. Sizes are drawn per epoch from the
    distribution and suppliers are assigned to groups at random.
    """
    kind = AggregationFunction.parse(aggregation)
    dist_kind = SizeKind(distribution)
    exp = "macro"
    jobs = [(N, rep) for N in group_sizes for rep in range(seeds)]

    def job(args):
        N, rep = args
        seed = replicate_seed(master_seed, rep)
        ctx = {"N": N, "distribution": dist_kind.value, "k": k, "strategy": "random", "replicate": rep}
        records: list[MetricRecord] = []
        sizes_seen: Counter = Counter()
        for idx, panel in enumerate(panels):
            rows = _eligible(panel, k)
            n = rows.size
            if n == 0:
                continue
            raw = panel.raw[rows]
            summ = bank.rows(idx, np.full(panel.lengths.size, k))[rows]
            if N == 1 or n < 2:
                labels = np.arange(n)
                sizes = [1] * n
            else:
                dist = SizeDistribution(dist_kind, N, gamma)
                sizes = sample_sizes(dist, n, stream_rng(seed, STREAM_SIZES, panel.epoch))
                order = stream_rng(seed, STREAM_PARTITION, panel.epoch).permutation(n)
                labels = np.empty(n, dtype=np.intp)
                labels[order] = labels_from_sizes(sizes)
            sizes_seen.update(sizes)
            ev = evaluate_epoch(raw, summ, labels, len(sizes), kind)
            _emit(records, exp, seed, panel.epoch, ev.metrics, ctx)
        return records, sizes_seen

    out = ExperimentResult(exp)
    size_tables: dict = defaultdict(Counter)
    for (N, _), (records, sizes_seen) in zip(jobs, _run_jobs(job, jobs, threads)):
        out.records.extend(records)
        size_tables[N].update(sizes_seen)
    out.summary = summarize_records(exp, out.records)
    for N in group_sizes:
        table = size_tables[N]
        total = sum(table.values())
        for size in sorted(table):
            out.sizes.append({"experiment": exp, "N": N, "distribution": dist_kind.value,
                              "size": size, "count": table[size],
                              "frequency": table[size] / total if total else 0.0})
    return out


def run_pair_grid(panels: Sequence[EpochPanel], bank: SummaryBank, *, k1_levels: Sequence[int],
                  k2_levels: Sequence[int], group_size: int = 2, seeds: int = 10, master_seed: int = 0,
                  aggregation: AggregationFunction | str = AggregationFunction.MEAN,
                  threads: int = 1) -> ExperimentResult:
    """Members a1 (level k1) and the rest of a group (level k2) for every (k1, k2).

    Suppliers are shuffled into groups of ``group_size`` each epoch; when the
    population is not a multiple of the group size the surplus is dropped at
    random and the count recorded as ``dropped_suppliers``.
    """
    kind = AggregationFunction.parse(aggregation)
    exp = "pair_grid"
    g = int(group_size)
    jobs = [(k1, k2, rep) for k1 in k1_levels for k2 in k2_levels for rep in range(seeds)]

    def job(args):
        k1, k2, rep = args
        seed = replicate_seed(master_seed, rep)
        ctx = {"k1": k1, "k2": k2, "group_size": g, "replicate": rep}
        records: list[MetricRecord] = []
        for idx, panel in enumerate(panels):
            rows = _eligible(panel, max(k1, k2))
            order = stream_rng(seed, STREAM_PAIRING, panel.epoch).permutation(rows.size)
            m = rows.size // g
            dropped = rows.size - m * g
            _emit_epoch(records, exp, seed, panel.epoch, "dropped_suppliers", dropped, ctx)
            if m == 0:
                continue
            chosen = rows[order[: m * g]]
            labels = np.repeat(np.arange(m), g)
            is_a1 = np.zeros(m * g, dtype=bool)
            is_a1[::g] = True
            ks = np.where(is_a1, k1, k2)
            level = np.zeros(panel.lengths.size, dtype=int)
            level[chosen] = ks
            raw = panel.raw[chosen]
            summ = bank.rows(idx, np.maximum(level, 1))[chosen]
            ev = evaluate_epoch(raw, summ, labels, m, kind)

            raw_groups = aggregate_epoch(raw, labels, m, kind).per_group
            lge_a1 = ev.lge[is_a1]                                         # (m, T)
            others = _group_sum(np.nan_to_num(ev.lge[~is_a1]), labels[~is_a1], m)
            other_cnt = _group_sum(np.isfinite(ev.lge[~is_a1]).astype(float), labels[~is_a1], m)
            with np.errstate(invalid="ignore", divide="ignore"):
                others_mean = others / other_cnt
            s_a1 = summ[is_a1]
            metrics = dict(ev.metrics)
            metrics.update({
                "lge_a1": _nanmean_rows(lge_a1),
                "lge_a2": _nanmean_rows(others_mean),
                "lge_pair_abs_diff": _nanmean_rows(np.abs(lge_a1 - others_mean)),
                "group_global_error": _nanmean_rows(symmetric_terms(raw_groups, ev.group_values)),
                "tge_a1": _nanmean_rows(symmetric_terms(s_a1, ev.group_values)),
            })
            _emit(records, exp, seed, panel.epoch, metrics, ctx)
            # population view: mean error in the a1 role vs the other role, per epoch
            gap = np.nanmean(metrics["lge_a1"]) - np.nanmean(metrics["lge_a2"])
            _emit_epoch(records, exp, seed, panel.epoch, "lge_diff", abs(gap), ctx)

            for name, member in (("privacy_correlation", raw[is_a1]),
                                 ("privacy_correlation_summarized", s_a1)):
                c = 1.0 - pearson_rows(member, ev.group_values)
                defined = np.isfinite(c)
                value = float(c[defined].mean()) if defined.any() else float("nan")
                _emit_epoch(records, exp, seed, panel.epoch, name, value, ctx)
        return records

    out = ExperimentResult(exp)
    for records in _run_jobs(job, jobs, threads):
        out.records.extend(records)
    out.summary = summarize_records(exp, out.records)
    return out


def crossover_sizes(summary: Sequence[dict]) -> tuple[float, dict[int, float]]:
    """Baseline maximum of the mean local group error and, per k, the smallest
    group size whose error exceeds it (NaN when none does)."""
    cells = {(r["group_size"], r["k"]): r["mean"] for r in summary if r["metric"] == "local_group_error"}
    base = [v for (size, _), v in cells.items() if size == 1]
    if not base:
        raise InvalidParameter("the incentive grid needs group size 1 as baseline")
    baseline_max = max(base)
    result = {}
    for k in sorted({k for _, k in cells}):
        above = sorted(size for (size, kk), v in cells.items() if kk == k and size > 1 and v > baseline_max)
        result[k] = float(above[0]) if above else float("nan")
    return baseline_max, result


def run_incentive_grid(panels: Sequence[EpochPanel], bank: SummaryBank, *, group_sizes: Sequence[int],
                       k_levels: Sequence[int], seeds: int = 10, master_seed: int = 0,
                       aggregation: AggregationFunction | str = AggregationFunction.MEAN,
                       threads: int = 1) -> ExperimentResult:
    """Mean local group error for every (group size, uniform k); size 1 is the
    no-groups baseline."""
    kind = AggregationFunction.parse(aggregation)
    exp = "incentive"
    jobs = [(size, k, rep) for size in group_sizes for k in k_levels for rep in range(seeds)]

    def job(args):
        size, k, rep = args
        seed = replicate_seed(master_seed, rep)
        ctx = {"group_size": size, "k": k, "replicate": rep}
        records: list[MetricRecord] = []
        for idx, panel in enumerate(panels):
            rows = _eligible(panel, k)
            n = rows.size
            if n == 0:
                continue
            if size == 1 or n < 2:
                labels, m = np.arange(n), n
            else:
                sizes = sample_sizes(SizeDistribution(SizeKind.FIXED, size), n)
                order = stream_rng(seed, STREAM_PARTITION, panel.epoch).permutation(n)
                labels = np.empty(n, dtype=np.intp)
                labels[order] = labels_from_sizes(sizes)
                m = len(sizes)
            summ = bank.rows(idx, np.full(panel.lengths.size, k))[rows]
            ev = evaluate_epoch(panel.raw[rows], summ, labels, m, kind)
            metrics = {name: ev.metrics[name] for name in ("local_group_error", "global_error")}
            _emit(records, exp, seed, panel.epoch, metrics, ctx)
        return records

    out = ExperimentResult(exp)
    for records in _run_jobs(job, jobs, threads):
        out.records.extend(records)
    out.summary = summarize_records(exp, out.records)
    if 1 in group_sizes:
        baseline_max, cross = crossover_sizes(out.summary)
        out.summary.append({"experiment": exp, "metric": "baseline_max_local_group_error",
                            "mean": baseline_max, "std": 0.0, "replicates": seeds})
        for k, size in cross.items():
            out.summary.append({"experiment": exp, "metric": "crossover_group_size", "k": k,
                                "mean": size, "std": 0.0, "replicates": seeds})
    return out


def _strategy_order(strategy: GroupingStrategy, panel: EpochPanel, rows: np.ndarray,
                    ks: np.ndarray, seed: int) -> np.ndarray:
    """Positions (into ``rows``) in the order they are chunked into groups."""
    n = rows.size
    if strategy is GroupingStrategy.RANDOM:
        return stream_rng(seed, STREAM_PARTITION, panel.epoch).permutation(n)
    ids = np.array(panel.suppliers, dtype=object)[rows]
    if strategy is GroupingStrategy.DATA_PROXIMITY:
        key = np.nanmean(panel.raw[rows], axis=1)
    else:
        key = ks[rows]
    # sort by key, ties by supplier id
    return np.array(sorted(range(n), key=lambda i: (key[i], ids[i])), dtype=np.intp)


def _size_layout(n: int, m: int, seed: int) -> list[int]:
    """Balanced sizes in a seeded random order.

    When m does not divide n some groups are one larger. Placing them first
    would always give the low end of a sorted ordering the larger groups and
    bias the mean of group means; the order is shuffled once per replicate
    (not per epoch) so proximity partitions stay stable across epochs.
    """
    sizes = balanced_sizes(n, m)
    perm = stream_rng(seed, STREAM_SIZES, m, n).permutation(m)
    return [sizes[i] for i in perm]


def run_strategy_sweep(panels: Sequence[EpochPanel], bank: SummaryBank, *, groups: Sequence[int],
                       std_targets: Sequence[float],
                       strategies: Sequence[GroupingStrategy | str] = tuple(GroupingStrategy),
                       compare_std: float | None = 2.0, k_init: int = 10, k_min: int = 1,
                       k_max: int = 19, max_steps: int = 100_000, seeds: int = 10,
                       master_seed: int = 0,
                       aggregation: AggregationFunction | str = AggregationFunction.MEAN,
                       threads: int = 1) -> ExperimentResult:
    """Compare grouping strategies over numbers of groups and level dispersions.

    All suppliers start at ``k_init`` and levels are dispersed by random
    unit transfers within ``[k_min, k_max]`` until the target standard
    deviation is reached. The dispersed levels are shared by every number
    of groups and strategy of a replicate.
    """
    kind = AggregationFunction.parse(aggregation)
    strategies = [GroupingStrategy.parse(s) for s in strategies]
    if bank.k_max < k_max:
        raise InvalidParameter(f"summary bank holds k <= {bank.k_max}, dispersion needs {k_max}")
    exp = "strategy"
    suppliers = sorted({s for p in panels for s in p.suppliers})
    jobs = [(std, rep) for std in std_targets for rep in range(seeds)]

    def job(args):
        std, rep = args
        seed = replicate_seed(master_seed, rep)
        start = SummarizationPolicy.uniform(suppliers, k_init, k_min=k_min, k_max=k_max)
        policy, achieved = disperse_levels(
            start, std, seed=stream_rng(seed, STREAM_DISPERSE, int(round(std * 1000))),
            max_steps=max_steps, k_min=k_min, k_max=k_max)
        records: list[MetricRecord] = []
        _emit_epoch(records, exp, seed, None, "achieved_std", achieved,
                    {"std_target": std, "replicate": rep})
        for m in groups:
            for strategy in strategies:
                ctx = {"m": m, "std_target": std, "strategy": strategy.value, "replicate": rep}
                for idx, panel in enumerate(panels):
                    ks = np.array([policy[s] for s in panel.suppliers], dtype=int)
                    rows = _eligible(panel, ks)
                    n = rows.size
                    if n < m:
                        log.warning("epoch %d: %d eligible suppliers, fewer than %d groups; skipped",
                                    panel.epoch + 1, n, m)
                        continue
                    order = _strategy_order(strategy, panel, rows, ks, seed)
                    labels = np.empty(n, dtype=np.intp)
                    labels[order] = labels_from_sizes(_size_layout(n, m, seed))
                    summ = bank.rows(idx, ks)[rows]
                    ev = evaluate_epoch(panel.raw[rows], summ, labels, m, kind)
                    metrics = {name: ev.metrics[name]
                               for name in ("local_group_error", "global_error", "local_error")}
                    _emit(records, exp, seed, panel.epoch, metrics, ctx)
        return records

    out = ExperimentResult(exp)
    for records in _run_jobs(job, jobs, threads):
        out.records.extend(records)
    out.summary = summarize_records(exp, out.records)
    if compare_std is not None and GroupingStrategy.RANDOM in strategies:
        out.summary.extend(strategy_comparison(out.records, compare_std))
    return out


def per_replicate_means(records: Iterable[MetricRecord], metric: str,
                        **context) -> dict[int, float]:
    """Mean of ``metric`` over epochs and time steps for every replicate whose
    context matches ``context``."""
    acc: dict[int, list[float]] = defaultdict(list)
    for r in records:
        if r.metric != metric or not r.defined:
            continue
        if all(r.context.get(k) == v for k, v in context.items()):
            acc[r.context["replicate"]].append(r.value)
    return {rep: float(np.mean(v)) for rep, v in sorted(acc.items())}


def strategy_comparison(records: Sequence[MetricRecord], std: float) -> list[dict]:
    """Paired comparison against random grouping at one dispersion level."""
    rows = []
    ms = sorted({r.context["m"] for r in records if "m" in r.context})
    strategies = sorted({r.context["strategy"] for r in records if "strategy" in r.context})
    for m in ms:
        base = per_replicate_means(records, "local_group_error", m=m, std_target=std,
                                   strategy=GroupingStrategy.RANDOM.value)
        for strategy in strategies:
            vals = per_replicate_means(records, "local_group_error", m=m, std_target=std,
                                       strategy=strategy)
            common = sorted(set(vals) & set(base))
            if not common:
                continue
            rel = np.array([(vals[r] - base[r]) / base[r] for r in common])
            rows.append({"experiment": "strategy", "metric": "lge_relative_to_random", "m": m,
                         "std_target": std, "strategy": strategy, "mean": float(rel.mean()),
                         "std": float(rel.std(ddof=1)) if rel.size > 1 else 0.0,
                         "replicates": int(rel.size)})
    return rows


# ---------------------------------------------------------------------------
# config-driven entry point


def load_series(config: ExperimentConfig) -> list[SupplierSeries]:
    if config.dataset == "synthetic":
        return generate_synthetic(
            config.synthetic_profile, config.synthetic_suppliers, config.synthetic_epochs,
            series_length=config.synthetic_series_length, trip_law=config.synthetic_trip_law,
            seed=config.synthetic_seed,
        )
    fmt = config.dataset_format
    if fmt is DatasetFormat.SYNTHETIC:
        fmt = detect_format(config.dataset)
    if fmt is DatasetFormat.NREL_LIKE:
        return load_nrel_like(config.dataset)
    series, report = load_ecbt_like(config.dataset, config.availability_threshold)
    log.info("preprocessing:\n%s", report.to_text())
    return series


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   series: Sequence[SupplierSeries] | None = None) -> ExperimentResult:
    if series is None:
        series = load_series(config)
    panels = build_panels(series, config.epochs)
    common = dict(seeds=config.seeds, master_seed=config.master_seed,
                  aggregation=config.aggregation, threads=threads)
    kind = config.experiment
    if kind is ExperimentKind.MACRO:
        bank = SummaryBank(panels, max(config.k_max, config.k)).prepare()
        return run_macro_sweep(panels, bank, group_sizes=config.group_sizes,
                               distribution=config.distribution, gamma=config.gamma,
                               k=config.k, **common)
    if kind is ExperimentKind.PAIR_GRID:
        top = max(max(config.k1_levels), max(config.k2_levels), config.k_max)
        bank = SummaryBank(panels, top).prepare()
        return run_pair_grid(panels, bank, k1_levels=config.k1_levels, k2_levels=config.k2_levels,
                             group_size=config.pair_group_size, **common)
    if kind is ExperimentKind.INCENTIVE:
        bank = SummaryBank(panels, max(max(config.k_levels), config.k_max)).prepare()
        return run_incentive_grid(panels, bank, group_sizes=config.group_sizes,
                                  k_levels=config.k_levels, **common)
    bank = SummaryBank(panels, max(config.dispersion_k_max, config.k_max)).prepare()
    return run_strategy_sweep(panels, bank, groups=config.groups, std_targets=config.std_targets,
                              strategies=config.strategies, compare_std=config.compare_std,
                              k_init=config.k_init, k_min=config.k_min,
                              k_max=config.dispersion_k_max, max_steps=config.max_steps, **common)


# ---------------------------------------------------------------------------
# output files


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _columns(rows: Sequence[dict], leading: Sequence[str]) -> list[str]:
    cols = list(leading)
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def _write_csv(path: Path, rows: Sequence[dict], leading: Sequence[str]) -> None:
    cols = _columns(rows, leading)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in cols])


RECORD_COLUMNS = ("experiment", "seed", "epoch", "t", "metric", "value", "defined")


def record_rows(records: Iterable[MetricRecord]) -> list[dict]:
    return [{"experiment": r.experiment, "seed": r.seed, "epoch": r.epoch, "t": r.t,
             "metric": r.metric, "value": r.value, "defined": int(r.defined), **r.context}
            for r in records]


def write_outputs(result: ExperimentResult, config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Write records.csv, summary.csv and sizes.csv, then manifest.json.

    The manifest is written last: a directory without one is incomplete.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.json"
    if manifest.exists():
        manifest.unlink()
    _write_csv(out / "records.csv", record_rows(result.records), RECORD_COLUMNS)
    _write_csv(out / "summary.csv", result.summary, ("experiment", "metric"))
    _write_csv(out / "sizes.csv", result.sizes, ("experiment", "N", "distribution", "size", "count", "frequency"))
    undefined = sum(not r.defined for r in result.records)
    info = {
        "experiment": result.experiment,
        "config_sha256": config.digest(),
        "master_seed": config.master_seed,
        "seeds": config.seeds,
        "records": len(result.records),
        "undefined_records": undefined,
        "package_version": __version__,
        "config": config.as_dict(),
    }
    manifest.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
