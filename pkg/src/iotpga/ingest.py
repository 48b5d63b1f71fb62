"""Dataset loading, preprocessing and synthetic generation.

Files are long-format CSV with a header row:

* load-style (fixed epoch length): ``supplier_id,epoch,t,value``
* trip-style (variable epoch length): ``supplier_id,epoch,trip,value``

``epoch`` and ``t``/``trip`` are 1-based in files and 0-based in memory.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import SupplierSeries
from .errors import DatasetError, InvalidParameter, ParseError

LOAD_COLUMNS = ("supplier_id", "epoch", "t", "value")
TRIP_COLUMNS = ("supplier_id", "epoch", "trip", "value")


class DatasetFormat(str, Enum):
    ECBT_LIKE = "ecbt_like"
    NREL_LIKE = "nrel_like"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class DatasetManifest:
    format: DatasetFormat
    epoch_length: int | None   # None when lengths vary
    suppliers: int
    epochs: int
    series: int


def manifest_of(series: Sequence[SupplierSeries], fmt: DatasetFormat | str) -> DatasetManifest:
    lengths = {len(s) for s in series}
    return DatasetManifest(
        format=DatasetFormat(fmt),
        epoch_length=lengths.pop() if len(lengths) == 1 else None,
        suppliers=len({s.supplier for s in series}),
        epochs=len({s.epoch for s in series}),
        series=len(series),
    )


@dataclass
class PreprocessReport:
    total_suppliers: int = 0
    retained_suppliers: int = 0
    dropped_suppliers: int = 0
    dropped_ids: list[str] = field(default_factory=list)
    epoch_length: int = 0
    epochs: int = 0
    expected_values: int = 0
    observed_values: int = 0
    interpolated_values: int = 0
    skipped_epochs: int = 0

    @property
    def retained_fraction(self) -> float:
        return self.retained_suppliers / self.total_suppliers if self.total_suppliers else 0.0

    def to_text(self) -> str:
        lines = [
            f"total_suppliers={self.total_suppliers}",
            f"retained_suppliers={self.retained_suppliers}",
            f"dropped_suppliers={self.dropped_suppliers}",
            f"retained_fraction={self.retained_fraction!r}",
            f"epoch_length={self.epoch_length}",
            f"epochs={self.epochs}",
            f"expected_values={self.expected_values}",
            f"observed_values={self.observed_values}",
            f"interpolated_values={self.interpolated_values}",
            f"skipped_epochs={self.skipped_epochs}",
        ]
        return "\n".join(lines) + "\n"


def _read_rows(path: str | Path, columns: tuple[str, ...]):
    """Yield (line_number, supplier, epoch0, index0, value_text)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", line=1, path=str(path)) from None
        header = [h.strip() for h in header]
        if tuple(header) != columns:
            raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}",
                             line=1, path=str(path))
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(columns):
                raise ParseError(f"expected {len(columns)} fields, got {len(row)}", line=line, path=str(path))
            supplier = row[0].strip()
            if not supplier:
                raise ParseError("empty supplier_id", line=line, path=str(path))
            try:
                epoch = int(row[1])
                index = int(row[2])
            except ValueError:
                raise ParseError(f"non-integer {columns[1]}/{columns[2]}: {row[1]!r}, {row[2]!r}",
                                 line=line, path=str(path)) from None
            if epoch < 1 or index < 1:
                raise ParseError(f"{columns[1]} and {columns[2]} are 1-based", line=line, path=str(path))
            yield line, supplier, epoch - 1, index - 1, row[3].strip()


def _parse_value(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        return math.nan
    return v if math.isfinite(v) else math.nan


def load_ecbt_like(
    path: str | Path,
    availability_threshold: float = 0.95,
    interpolate: bool = True,
    epoch_length: int | None = None,
) -> tuple[list[SupplierSeries], PreprocessReport]:
    """Load fixed-length (load-profile style) data and clean it.

    A supplier's availability is its count of numeric values over the number
    of expected cells (every epoch in the file times the epoch length).
    Suppliers below ``availability_threshold`` are dropped. Remaining gaps
    are filled by linear interpolation inside each epoch; leading/trailing
    gaps take the nearest observed value. Epochs with no observation at all
    are skipped and counted.
    """
    if not 0.0 <= availability_threshold <= 1.0:
        raise InvalidParameter(f"availability threshold must be in [0, 1], got {availability_threshold}")
    cells: dict[str, dict[int, dict[int, float]]] = defaultdict(lambda: defaultdict(dict))
    epochs: set[int] = set()
    max_t = -1
    for line, supplier, epoch, t, text in _read_rows(path, LOAD_COLUMNS):
        if t in cells[supplier][epoch]:
            raise ParseError(f"duplicate cell supplier={supplier} epoch={epoch + 1} t={t + 1}",
                             line=line, path=str(path))
        cells[supplier][epoch][t] = _parse_value(text)
        epochs.add(epoch)
        max_t = max(max_t, t)

    T = epoch_length if epoch_length is not None else max_t + 1
    if max_t >= T:
        raise DatasetError(f"time index {max_t + 1} exceeds epoch length {T}")
    report = PreprocessReport(total_suppliers=len(cells), epoch_length=max(T, 0), epochs=len(epochs))
    expected = len(epochs) * T
    out: list[SupplierSeries] = []
    grid = np.arange(T)
    for supplier in sorted(cells):
        by_epoch = cells[supplier]
        observed = sum(1 for e in by_epoch.values() for v in e.values() if not math.isnan(v))
        report.expected_values += expected
        report.observed_values += observed
        if expected == 0 or observed / expected < availability_threshold:
            report.dropped_suppliers += 1
            report.dropped_ids.append(supplier)
            continue
        report.retained_suppliers += 1
        for epoch in sorted(epochs):
            row = np.full(T, np.nan)
            for t, v in by_epoch.get(epoch, {}).items():
                row[t] = v
            have = ~np.isnan(row)
            if not have.any():
                report.skipped_epochs += 1
                continue
            if not have.all():
                if not interpolate:
                    report.skipped_epochs += 1
                    continue
                report.interpolated_values += int((~have).sum())
                row[~have] = np.interp(grid[~have], grid[have], row[have])
            if row.size != T:
                raise DatasetError(f"supplier {supplier} epoch {epoch + 1}: {row.size} values, expected {T}")
            out.append(SupplierSeries(supplier, epoch, tuple(row.tolist())))
    return out, report


def load_nrel_like(path: str | Path) -> list[SupplierSeries]:
    """Load variable-length (per-trip) data: one series per (supplier, epoch),
    ordered by trip index."""
    trips: dict[tuple[str, int], dict[int, float]] = defaultdict(dict)
    for line, supplier, epoch, trip, text in _read_rows(path, TRIP_COLUMNS):
        try:
            v = float(text)
        except ValueError:
            raise ParseError(f"non-numeric value {text!r}", line=line, path=str(path)) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {text!r}", line=line, path=str(path))
        if trip in trips[(supplier, epoch)]:
            raise ParseError(f"duplicate trip supplier={supplier} epoch={epoch + 1} trip={trip + 1}",
                             line=line, path=str(path))
        trips[(supplier, epoch)][trip] = v
    return [
        SupplierSeries(supplier, epoch, tuple(v for _, v in sorted(trips[(supplier, epoch)].items())))
        for supplier, epoch in sorted(trips)
    ]


def detect_format(path: str | Path) -> DatasetFormat:
    """Tell load-style from trip-style files by their header."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), [])
    except OSError as exc:
        raise DatasetError(f"{path}: {exc.strerror}") from None
    header = tuple(h.strip() for h in header)
    if header == TRIP_COLUMNS:
        return DatasetFormat.NREL_LIKE
    if header == LOAD_COLUMNS:
        return DatasetFormat.ECBT_LIKE
    raise ParseError(f"unrecognized header {','.join(header)}", line=1, path=str(path))


def load_dataset(path: str | Path, fmt: DatasetFormat | str, **kwargs) -> list[SupplierSeries]:
    fmt = DatasetFormat(fmt)
    if fmt is DatasetFormat.SYNTHETIC:
        fmt = detect_format(path)
    if fmt is DatasetFormat.NREL_LIKE:
        return load_nrel_like(path)
    series, _ = load_ecbt_like(path, **kwargs)
    return series


def write_dataset(series: Iterable[SupplierSeries], path: str | Path,
                  fmt: DatasetFormat | str = DatasetFormat.ECBT_LIKE) -> None:
    """Write series in long format; values use shortest round-trip decimals."""
    fmt = DatasetFormat(fmt)
    columns = TRIP_COLUMNS if fmt is DatasetFormat.NREL_LIKE else LOAD_COLUMNS
    ordered = sorted(series, key=lambda s: (str(s.supplier), s.epoch))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for s in ordered:
            for t, v in enumerate(s.values):
                w.writerow((s.supplier, s.epoch + 1, t + 1, repr(float(v))))


def filter_by_level(series: Iterable[SupplierSeries], k: int) -> tuple[list[SupplierSeries], int]:
    """Keep series with at least ``k`` points; also return how many were kept."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    kept = [s for s in series if len(s) >= k]
    return kept, len(kept)


def eligible_counts(series: Sequence[SupplierSeries], ks: Iterable[int]) -> dict[int, int]:
    """Number of distinct suppliers with at least one eligible series per k."""
    lengths: dict = defaultdict(int)
    for s in series:
        lengths[s.supplier] = max(lengths[s.supplier], len(s))
    return {k: sum(1 for L in lengths.values() if L >= k) for k in ks}


# ---------------------------------------------------------------------------
# synthetic data

@dataclass(frozen=True)
class TripLaw:
    kind: str = "poisson"
    param: float = 4.0

    @classmethod
    def parse(cls, text: str) -> "TripLaw":
        """``poisson:LAM``, ``geometric:P`` or ``fixed:N``."""
        kind, _, param = text.partition(":")
        kind = kind.strip().lower()
        if kind not in {"poisson", "geometric", "fixed"} or not param:
            raise InvalidParameter(f"bad trip law {text!r}; use poisson:LAM, geometric:P or fixed:N")
        try:
            value = float(param)
        except ValueError:
            raise InvalidParameter(f"bad trip law parameter {param!r}") from None
        if value <= 0 or (kind == "geometric" and value > 1):
            raise InvalidParameter(f"trip law parameter out of range: {text!r}")
        return cls(kind, value)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "poisson":
            return rng.poisson(self.param, size)
        if self.kind == "geometric":
            return rng.geometric(self.param, size) - 1
        return np.full(size, int(self.param))


def _supplier_ids(n: int) -> list[str]:
    width = max(4, len(str(n - 1)))
    return [f"S{i:0{width}d}" for i in range(n)]


def _daily_load(rng: np.random.Generator, n: int, epochs: int, T: int) -> list[SupplierSeries]:
    hours = (np.arange(T) + 0.5) * 24.0 / T
    base = rng.lognormal(mean=np.log(0.3), sigma=0.5, size=n)        # kWh per interval
    morning = rng.uniform(0.2, 1.0, n)
    evening = rng.uniform(0.5, 2.0, n)
    shift = rng.normal(0.0, 1.0, n)
    out = []
    ids = _supplier_ids(n)
    for i in range(n):
        shape = (
            1.0
            + morning[i] * np.exp(-0.5 * ((hours - 7.5 - shift[i]) / 1.5) ** 2)
            + evening[i] * np.exp(-0.5 * ((hours - 19.0 - shift[i]) / 2.0) ** 2)
        )
        for e in range(epochs):
            day = rng.lognormal(0.0, 0.15)
            noise = rng.lognormal(0.0, 0.35, T)
            values = base[i] * day * shape * noise
            out.append(SupplierSeries(ids[i], e, tuple(np.maximum(np.round(values, 6), 1e-6).tolist())))
    return out


def _trip_speeds(rng: np.random.Generator, n: int, epochs: int, law: TripLaw) -> list[SupplierSeries]:
    typical = rng.lognormal(np.log(35.0), 0.4, n)                    # km/h
    ids = _supplier_ids(n)
    out = []
    for i in range(n):
        counts = law.draw(rng, epochs)
        for e in range(epochs):
            c = int(counts[e])
            if c <= 0:
                continue
            speeds = typical[i] * rng.lognormal(0.0, 0.45, c)
            out.append(SupplierSeries(ids[i], e, tuple(np.maximum(np.round(speeds, 4), 1e-4).tolist())))
    return out


def generate_synthetic(
    profile: str,
    n: int,
    epochs: int,
    series_length: int = 48,
    trip_law: TripLaw | str = "poisson:4",
    seed=None,
) -> list[SupplierSeries]:
    """Deterministic synthetic dataset.

    ``daily_load``: per-supplier base level times a two-peak diurnal shape,
    with day-level and per-interval log-normal noise; strictly positive.
    ``trip_speeds``: per-(supplier, epoch) trip counts from ``trip_law`` and
    positive speeds around a per-supplier typical speed. Zero-trip epochs
    produce no series.
    """
    if n < 2:
        raise InvalidParameter(f"need at least 2 suppliers, got {n}")
    if epochs < 1:
        raise InvalidParameter(f"need at least 1 epoch, got {epochs}")
    rng = np.random.default_rng(seed)
    if profile == "daily_load":
        if series_length < 1:
            raise InvalidParameter(f"series length must be >= 1, got {series_length}")
        return _daily_load(rng, n, epochs, series_length)
    if profile == "trip_speeds":
        law = TripLaw.parse(trip_law) if isinstance(trip_law, str) else trip_law
        return _trip_speeds(rng, n, epochs, law)
    raise InvalidParameter(f"unknown profile {profile!r}; use daily_load or trip_speeds")


__all__ = [
    "DatasetFormat",
    "DatasetManifest",
    "PreprocessReport",
    "TripLaw",
    "detect_format",
    "eligible_counts",
    "filter_by_level",
    "generate_synthetic",
    "load_dataset",
    "load_ecbt_like",
    "load_nrel_like",
    "manifest_of",
    "write_dataset",
]
