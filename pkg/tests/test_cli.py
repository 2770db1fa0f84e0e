"""Command-line surface: exit codes, JSON schema, CSV output."""

import json

import pytest

from linebroadcast import validate
from linebroadcast.cli import (
    CSV_HEADER,
    main,
    schedule_from_dict,
    schedule_to_dict,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_auto_ok(capsys):
    code, out, _ = run_cli(capsys, "run", "--k", "2", "--r", "2", "--alg", "auto")
    assert code == 0
    assert "algorithm=alg3" in out and "total_time=3" in out


def test_run_json_schema(capsys):
    code, out, _ = run_cli(capsys, "run", "--k", "3", "--r", "2",
                           "--alg", "alg1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["algorithm"] == "alg1"
    assert data["k"] == 3 and data["r"] == 2 and data["n"] == 13
    assert data["total_time"] <= 4
    assert data["valid"] is True
    first = data["steps"][0]["calls"][0]
    assert set(first) == {"src", "dst", "path", "cost"}


def test_run_usage_error(capsys):
    code, _, err = run_cli(capsys, "run", "--k", "1", "--r", "2")
    assert code == 1
    assert "InvalidParams" in err


def test_run_unknown_alg(capsys):
    code, _, err = run_cli(capsys, "run", "--k", "2", "--r", "2",
                           "--alg", "mystery")
    assert code == 1


def test_run_fragments(capsys):
    code, out, _ = run_cli(capsys, "run", "--k", "2", "--r", "2",
                           "--alg", "tolevel:2")
    assert code == 0 and "valid=true" in out
    code, out, _ = run_cli(capsys, "run", "--k", "2", "--r", "2",
                           "--alg", "fromlevel:2")
    assert code == 0 and "valid=true" in out


def test_run_deviation_exit(capsys):
    # a deep originator makes alg1 open with a relay call, which is flagged
    code, out, _ = run_cli(capsys, "run", "--k", "3", "--r", "2",
                           "--originator", "6", "--alg", "alg1")
    assert code == 3
    assert "valid=true" in out


def test_json_roundtrip_revalidates_identically():
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        main(["run", "--k", "2", "--r", "3", "--alg", "auto", "--format", "json"])
    data = json.loads(buf.getvalue())
    sched = schedule_from_dict(data)
    rep = validate(sched)
    again = schedule_to_dict(sched, rep.ok)
    assert again == data
    assert rep == validate(sched)


def test_from_dict_rejects_wrong_path():
    broken = {
        "k": 2, "r": 1, "n": 3, "originator": 1, "algorithm": "x",
        "steps": [{"t": 1, "calls": [
            {"src": 1, "dst": 2, "path": [3], "cost": 1}]}],
        "total_time": 1, "total_cost": 1, "valid": True, "deviations": [],
    }
    with pytest.raises(ValueError):
        schedule_from_dict(broken)


def test_bounds_output(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--k", "2", "--r", "2")
    assert code == 0
    assert "lower_bound     6" in out
    assert "case            alg3" in out
    assert "farley_bound    18" in out

    code, out, _ = run_cli(capsys, "bounds", "--k", "5", "--r", "3")
    assert code == 0
    assert "241.3125" in out


def test_sweep_csv(tmp_path, capsys):
    out_path = tmp_path / "grid.csv"
    code, _, _ = run_cli(capsys, "sweep", "--k", "2..4", "--r", "1..3",
                         "--originators", "root", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 10  # header + 9 rows
    row = next(l for l in lines if l.startswith("2,2,"))
    cells = row.split(",")
    assert cells[:6] == ["2", "2", "7", "1", "alg3", "3"]
    assert cells[9] == "6" and cells[10] == "14" and cells[11] == "18"
    assert cells[12] == "true"
    cost = int(cells[8])
    assert 6 <= cost <= 14


def test_sweep_all_originators(tmp_path, capsys):
    out_path = tmp_path / "all.csv"
    code, _, _ = run_cli(capsys, "sweep", "--k", "2..2", "--r", "1..1",
                         "--originators", "all", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert len(lines) == 4  # header + u in {1, 2, 3}


def test_sweep_deterministic(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    run_cli(capsys, "sweep", "--k", "2..3", "--r", "1..2", "--out", str(a))
    run_cli(capsys, "sweep", "--k", "2..3", "--r", "1..2", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_sweep_bad_range(capsys):
    code, _, err = run_cli(capsys, "sweep", "--k", "4..2", "--r", "1..1")
    assert code == 1


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    run_cli(capsys, "sweep", "--k", "2..3", "--r", "1..2", "--out", str(serial))
    run_cli(capsys, "sweep", "--k", "2..3", "--r", "1..2",
            "--parallel", "2", "--out", str(parallel))
    assert serial.read_bytes() == parallel.read_bytes()


def test_run_fragment_bad_level(capsys):
    code, _, err = run_cli(capsys, "run", "--k", "2", "--r", "2",
                           "--alg", "tolevel:0")
    assert code == 1


def test_oracle_cli(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--k", "2", "--r", "1")
    assert code == 0
    assert "optimal_cost=2" in out and "bracket_ok=true" in out

    code, out, _ = run_cli(capsys, "oracle", "--k", "3", "--r", "1")
    assert code == 0
    assert "optimal_cost=4" in out

    code, _, err = run_cli(capsys, "oracle", "--k", "3", "--r", "2")
    assert code == 5
