import csv
import io
import json

import numpy as np
import pytest

from iotpga import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_data_shape_and_determinism(tmp_path, capsys):
    args = ["gen-data", "--profile", "daily_load", "--suppliers", "100", "--epochs", "30",
            "--series-length", "48", "--seed", "7"]
    assert run(args + ["--out", str(tmp_path / "a.csv")], capsys)[0] == 0
    assert run(args + ["--out", str(tmp_path / "b.csv")], capsys)[0] == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    rows = list(csv.reader(io.StringIO(a.decode())))[1:]
    assert len({(r[0], r[1]) for r in rows}) == 3000


def test_gen_data_rejects_single_supplier(tmp_path, capsys):
    code, _, err = run(["gen-data", "--suppliers", "1", "--epochs", "2", "--out", str(tmp_path / "x")], capsys)
    assert code == 1 and "suppliers" in err


@pytest.fixture
def dataset(tmp_path, capsys):
    p = tmp_path / "d.csv"
    cli.main(["gen-data", "--suppliers", "5", "--epochs", "2", "--series-length", "12", "--out", str(p)])
    capsys.readouterr()
    return p


def _table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def test_summarize_views(dataset, capsys):
    base = ["summarize", "--in", str(dataset), "--supplier", "S0002", "--epoch", "2"]
    code, out, _ = run(base + ["--k", "1"], capsys)
    header, t = _table(out)
    assert code == 0 and header == ["t", "raw", "k1"]
    assert np.ptp(t[:, 1]) == 0 and t[0, 1] == pytest.approx(t[:, 0].mean(), rel=1e-12)
    distinct = np.unique(t[:, 0]).size
    _, t = _table(run(base + ["--k", str(distinct)], capsys)[1])
    assert np.array_equal(t[:, 0], t[:, 1])
    _, t3 = _table(run(base + ["--k", "3"], capsys)[1])
    _, t5 = _table(run(base + ["--k", "5"], capsys)[1])
    assert np.unique(t5[:, 1]).size >= np.unique(t3[:, 1]).size


def test_summarize_errors(dataset, capsys):
    base = ["summarize", "--in", str(dataset), "--supplier", "S0002", "--epoch", "1"]
    code, _, err = run(base + ["--k", "13"], capsys)
    assert code == 2 and "insufficient data" in err
    assert run(base + ["--k", "0"], capsys)[0] == 1
    assert run(["summarize", "--in", str(dataset), "--supplier", "nobody", "--epoch", "1", "--k", "2"],
               capsys)[0] == 2
    assert run(["summarize", "--in", "/nonexistent.csv", "--supplier", "a", "--epoch", "1", "--k", "2"],
               capsys)[0] == 2


def test_eligible(tmp_path, dataset, capsys):
    code, out, _ = run(["eligible", "--in", str(dataset), "--k-range", "1-14"], capsys)
    counts = [int(r[1]) for r in list(csv.reader(io.StringIO(out)))[1:]]
    assert code == 0 and counts == [5] * 12 + [0, 0]
    trips = tmp_path / "t.csv"
    cli.main(["gen-data", "--profile", "trip_speeds", "--suppliers", "40", "--epochs", "5", "--out", str(trips)])
    capsys.readouterr()
    out = run(["eligible", "--in", str(trips), "--k-range", "1:12"], capsys)[1]
    counts = [int(r[1]) for r in list(csv.reader(io.StringIO(out)))[1:]]
    assert counts == sorted(counts, reverse=True)
    assert run(["eligible", "--in", str(trips), "--k-range", "5-2"], capsys)[0] == 1


def _sweep_config(tmp_path, **extra):
    cfg = {"experiment": "macro", "seeds": 2, "synthetic_suppliers": 20, "synthetic_epochs": 2,
           "synthetic_series_length": 12, "k": 4, **extra}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_sweep_outputs(tmp_path, capsys):
    cfg = _sweep_config(tmp_path)
    assert run(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)[0] == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["master_seed"] == 0 and len(manifest["config_sha256"]) == 64
    with open(tmp_path / "o" / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    pairs = [(r["N"], r["metric"]) for r in rows]
    assert len(pairs) == len(set(pairs))
    assert {r["N"] for r in rows} == {"1", "2", "5", "10", "20"}
    assert (tmp_path / "o" / "sizes.csv").exists()


def test_sweep_seed_override(tmp_path, capsys, monkeypatch):
    cfg = _sweep_config(tmp_path, group_sizes=[2])
    monkeypatch.setenv(cli.SEED_ENV, "123")
    assert run(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys)[0] == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["master_seed"] == 123
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    assert run(["sweep", "--config", str(cfg), "--out", str(tmp_path / "p")], capsys)[0] == 1


def test_sweep_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: macro\ngroup_sizes: [1, 2\n")
    code, _, err = run(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "bad.yaml:" in err
    assert not (tmp_path / "o" / "manifest.json").exists()
    bad.write_text("experiment: macro\ncolour: blue\n")
    code, _, err = run(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "colour" in err


def test_usage_errors(capsys):
    assert run(["sweep"], capsys)[0] == 1
    assert run(["nope"], capsys)[0] == 1
