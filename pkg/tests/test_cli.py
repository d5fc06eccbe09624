import csv
import json

import pytest

from rsalloc.cli import main


def write_config(path, **kwargs):
    path.write_text(json.dumps(kwargs))
    return str(path)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


BENCH_INSTANCE = {"means": [0.0, 2.0, 4.0], "variances": [1.0, 1.0, 1.0]}


def test_bench_produces_expected_cells(tmp_path):
    out = tmp_path / "out.csv"
    cfg = write_config(tmp_path / "cfg.json", **BENCH_INSTANCE,
                       policies=["ea", "ocba", "faa", "daa"],
                       budgets=[15, 20], reps=50, seed=5, n0=3,
                       output=str(out),
                       json_output=str(tmp_path / "out.json"))
    assert main(["bench", "--config", cfg]) == 0
    rows = read_rows(out)
    assert len(rows) == 8
    assert set(r["policy"] for r in rows) == {"ea", "ocba", "faa", "daa"}
    for row in rows:
        assert row["example"] == "custom"
        assert 0.0 <= float(row["pcs"]) <= 1.0
        assert row["wall_seconds"] == "0.000"
        assert row["seed"] == "5"
        assert row["reps"] == "50"
    mirrored = json.loads((tmp_path / "out.json").read_text())
    assert len(mirrored) == 8
    assert mirrored[0]["pcs"] == rows[0]["pcs"]


def test_bench_byte_identical_reruns(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    base = dict(**BENCH_INSTANCE, policies=["ea", "daa"], budgets=[15],
                reps=40, seed=7, n0=3)
    cfg1 = write_config(tmp_path / "c1.json", **base, output=str(out1))
    cfg2 = write_config(tmp_path / "c2.json", **base, output=str(out2))
    assert main(["bench", "--config", cfg1]) == 0
    assert main(["bench", "--config", cfg2]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_bench_error_cell_row(tmp_path, capsys):
    out = tmp_path / "out.csv"
    cfg = write_config(tmp_path / "cfg.json", **BENCH_INSTANCE,
                       policies=["ea"], budgets=[5], reps=10, seed=1, n0=3,
                       output=str(out))
    assert main(["bench", "--config", cfg]) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    assert rows[0]["pcs"] == "nan"
    assert "warning" in capsys.readouterr().err


def test_bench_example_id(tmp_path):
    out = tmp_path / "out.csv"
    cfg = write_config(tmp_path / "cfg.json", example="three_design",
                       policies=["ea"], budgets=[15], reps=30, seed=2,
                       output=str(out))
    assert main(["bench", "--config", cfg]) == 0
    assert read_rows(out)[0]["example"] == "three_design"


def test_invalid_configs_exit_nonzero(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", example="nope", policies=["ea"],
                       budgets=[15], output="x.csv")
    assert main(["bench", "--config", cfg]) == 2
    cfg = write_config(tmp_path / "c2.json", **BENCH_INSTANCE,
                       policies=["bogus"], budgets=[15], output="x.csv")
    assert main(["bench", "--config", cfg]) == 2
    cfg = write_config(tmp_path / "c3.json", **BENCH_INSTANCE,
                       policies=["ea"], budgets=[], output="x.csv")
    assert main(["bench", "--config", cfg]) == 2
    assert main(["bench", "--config", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_cli_flag_overrides(tmp_path):
    out = tmp_path / "out.csv"
    cfg = write_config(tmp_path / "cfg.json", **BENCH_INSTANCE,
                       policies=["ea"], budgets=[15], reps=10, seed=1,
                       output="ignored.csv")
    assert main(["bench", "--config", cfg, "--reps", "25", "--seed", "9",
                 "--output", str(out)]) == 0
    row = read_rows(out)[0]
    assert row["reps"] == "25"
    assert row["seed"] == "9"


def test_oracle_subcommand(tmp_path, capsys):
    out = tmp_path / "oracle.csv"
    cfg = write_config(tmp_path / "cfg.json",
                       means=[0.0, 1.0], variances=[4.0, 4.0],
                       budgets=[20], step=0.25, reps=4000, seed=3,
                       output=str(out))
    assert main(["oracle", "--config", cfg]) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    assert rows[0]["weights"] == "0.5000|0.5000"
    assert "best grid allocation" in capsys.readouterr().out


def test_facloc_subcommand(tmp_path):
    out = tmp_path / "facloc.csv"
    cfg = write_config(tmp_path / "cfg.json", policies=["ea"], budgets=[35],
                       reps=2, seed=1, n0=3, days=1, output=str(out))
    assert main(["facloc", "--config", cfg]) == 0
    rows = read_rows(out)
    assert len(rows) == 1
    assert rows[0]["example"] == "facloc"
    assert 0.0 <= float(rows[0]["pcs"]) <= 1.0


def test_check_subcommand(capsys):
    assert main(["check", "--instances", "6", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out
    assert "[FAIL]" not in out
