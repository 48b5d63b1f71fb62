import numpy as np
import pytest

from iotpga.core import SupplierSeries
from iotpga.errors import DatasetError, InvalidParameter, ParseError
from iotpga.ingest import (
    DatasetFormat,
    TripLaw,
    detect_format,
    eligible_counts,
    filter_by_level,
    generate_synthetic,
    load_dataset,
    load_ecbt_like,
    load_nrel_like,
    manifest_of,
    write_dataset,
)


def _write(path, header, rows):
    path.write_text(header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


def _load_rows(supplier, T, skip=(), epoch=1, values=None):
    vals = values or [float(t + 1) for t in range(T)]
    return [(supplier, epoch, t + 1, vals[t]) for t in range(T) if t not in skip]


def test_full_supplier_retained_unchanged(tmp_path):
    p = _write(tmp_path / "d.csv", "supplier_id,epoch,t,value", _load_rows("a", 10))
    series, rep = load_ecbt_like(p)
    assert [s.values for s in series] == [tuple(float(t) for t in range(1, 11))]
    assert rep.retained_suppliers == rep.total_suppliers == 1 and rep.interpolated_values == 0


def test_low_availability_dropped(tmp_path):
    rows = _load_rows("a", 20) + _load_rows("b", 20, skip={3, 4})
    series, rep = load_ecbt_like(_write(tmp_path / "d.csv", "supplier_id,epoch,t,value", rows), 0.95)
    assert {s.supplier for s in series} == {"a"}
    assert rep.dropped_suppliers == 1 and rep.dropped_ids == ["b"]
    assert rep.retained_suppliers + rep.dropped_suppliers == rep.total_suppliers


def test_interior_gap_interpolated(tmp_path):
    vals = [10.0, 999.0, 20.0] + [1.0] * 17
    rows = _load_rows("a", 20, skip={1}, values=vals)
    series, rep = load_ecbt_like(_write(tmp_path / "d.csv", "supplier_id,epoch,t,value", rows), 0.95)
    assert series[0].values[:3] == (10.0, 15.0, 20.0)
    assert rep.interpolated_values == 1


def test_edge_gap_takes_nearest(tmp_path):
    vals = [0.0, 7.0] + [3.0] * 18
    rows = _load_rows("a", 20, skip={0}, values=vals)
    series, _ = load_ecbt_like(_write(tmp_path / "d.csv", "supplier_id,epoch,t,value", rows), 0.9)
    assert series[0].values[0] == 7.0


def test_non_numeric_is_missing(tmp_path):
    rows = _load_rows("a", 20)
    rows[5] = ("a", 1, 6, "n/a")
    series, rep = load_ecbt_like(_write(tmp_path / "d.csv", "supplier_id,epoch,t,value", rows), 0.9)
    assert series[0].values[5] == 6.0 and rep.interpolated_values == 1


def test_parse_errors_carry_line_numbers(tmp_path):
    p = _write(tmp_path / "d.csv", "supplier_id,epoch,t,value", [("a", 1, 1, 2.0), ("a", "x", 2, 2.0)])
    with pytest.raises(ParseError, match=":3:"):
        load_ecbt_like(p)
    p = _write(tmp_path / "e.csv", "who,epoch,t,value", [])
    with pytest.raises(ParseError, match=":1:"):
        load_ecbt_like(p)
    p = _write(tmp_path / "f.csv", "supplier_id,epoch,t,value", [("a", 1, 1, 2.0), ("a", 1, 1, 3.0)])
    with pytest.raises(ParseError, match="duplicate"):
        load_ecbt_like(p)
    p = _write(tmp_path / "g.csv", "supplier_id,epoch,trip,value", [("a", 1, 1, "fast")])
    with pytest.raises(ParseError):
        load_nrel_like(p)


def test_nrel_like_lengths(tmp_path):
    rows = [("a", 1, 1, 30.0), ("a", 1, 3, 32.0), ("a", 1, 2, 31.0), ("b", 2, 1, 40.0)]
    p = _write(tmp_path / "n.csv", "supplier_id,epoch,trip,value", rows)
    series = load_nrel_like(p)
    assert [(s.supplier, s.epoch, s.values) for s in series] == [
        ("a", 0, (30.0, 31.0, 32.0)), ("b", 1, (40.0,))]
    assert ("b", 0) not in {s.key for s in series}
    assert load_nrel_like(p) == series
    assert detect_format(p) is DatasetFormat.NREL_LIKE


def test_filter_and_eligible():
    series = [SupplierSeries(f"s{i}", 0, tuple(range(L))) for i, L in enumerate((3, 5, 12))]
    kept, count = filter_by_level(series, 5)
    assert count == 2 and [len(s) for s in kept] == [5, 12]
    assert filter_by_level(series, 1)[1] == 3
    counts = eligible_counts(series, range(1, 15))
    assert list(counts.values()) == sorted(counts.values(), reverse=True)
    assert counts[13] == 0
    with pytest.raises(InvalidParameter):
        filter_by_level(series, 0)


def test_synthetic_shape_and_determinism():
    a = generate_synthetic("daily_load", 100, 30, series_length=48, seed=7)
    assert len(a) == 3000 and all(len(s) == 48 for s in a)
    assert a == generate_synthetic("daily_load", 100, 30, series_length=48, seed=7)
    assert min(min(s.values) for s in a) > 0
    m = manifest_of(a, "synthetic")
    assert (m.suppliers, m.epochs, m.epoch_length) == (100, 30, 48)


def test_trip_speeds():
    s = generate_synthetic("trip_speeds", 50, 10, trip_law="poisson:3", seed=1)
    assert all(len(x) >= 1 and min(x.values) > 0 for x in s)
    assert len(s) < 500  # some zero-trip epochs vanish
    assert manifest_of(s, "nrel_like").epoch_length is None
    with pytest.raises(InvalidParameter):
        generate_synthetic("trip_speeds", 5, 2, trip_law="binomial:3")
    with pytest.raises(InvalidParameter):
        generate_synthetic("daily_load", 1, 2)
    assert TripLaw.parse("fixed:4").draw(np.random.default_rng(0), 3).tolist() == [4, 4, 4]


@pytest.mark.parametrize("profile,fmt", [("daily_load", "ecbt_like"), ("trip_speeds", "nrel_like")])
def test_round_trip(tmp_path, profile, fmt):
    series = generate_synthetic(profile, 12, 4, series_length=10, seed=3)
    write_dataset(series, tmp_path / "x.csv", fmt)
    again = load_dataset(tmp_path / "x.csv", "synthetic")
    assert sorted(again, key=lambda s: s.key) == sorted(series, key=lambda s: s.key)


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError):
        detect_format(tmp_path / "nope.csv")
