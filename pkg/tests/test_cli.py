from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from ctwalk import __version__, cli
from ctwalk.cli import ConfigError, main, parse_range, validate
from ctwalk.dynamics import NormDriftError

HEADERS = {
    "search": ["t", "prob_m", "norm"],
    "adiabatic": ["t", "prob_m", "norm", "ground_fidelity"],
    "hybrid": ["t", "prob_m", "norm", "ground_fidelity"],
    "gapscan": ["s", "E0", "E1", "gap"],
    "walk": ["t", "norm", "sigma", "p_start"],
    "sk-sample": ["shot", "index", "bits", "energy"],
    "glued-trees": ["t", "p_exit"],
    "encode-table": ["n", "N", "unary_symbols", "binary_bits"],
}

SMALL_RUNS = {
    "search": ["--n", "4", "--m", "3", "--gamma", "0.3", "--tf", "10", "--shots", "20", "--seed", "4"],
    "adiabatic": ["--n", "3", "--m", "5", "--tf", "10", "--samples", "16"],
    "hybrid": ["--n", "3", "--m", "5", "--tf", "10", "--c", "0.3", "--samples", "16"],
    "gapscan": ["--n", "3", "--m", "1", "--resolution", "20"],
    "walk": ["--graph", "line", "--size", "41", "--tf", "5", "--samples", "11"],
    "sk-sample": ["--n", "4", "--shots", "30", "--seed", "2"],
    "glued-trees": ["--depth", "2", "--seed", "1", "--tf", "5"],
    "encode-table": ["--max-n", "6"],
}


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def run_cli(command, args, out):
    code = main([command, *args, "--out", str(out)])
    assert code == 0
    record = json.loads((out / f"{command}.json").read_text())
    rows = read_csv(out / f"{command}.csv") if (out / f"{command}.csv").exists() else None
    return record, rows


@pytest.mark.parametrize("command", sorted(SMALL_RUNS))
def test_headers_and_record(command, tmp_path):
    record, rows = run_cli(command, SMALL_RUNS[command], tmp_path)
    assert rows[0] == HEADERS[command]
    assert record["version"] == __version__ and record["command"] == command
    assert record["seed"] == record["params"]["seed"]
    text = (tmp_path / f"{command}.json").read_text()
    assert text == json.dumps(record, indent=2, sort_keys=True) + "\n"
    for row in rows[1:]:
        for cell in row:
            assert "," not in cell


@pytest.mark.parametrize("command", sorted(SMALL_RUNS))
def test_rerun_bit_identical(command, tmp_path):
    a, rows_a = run_cli(command, SMALL_RUNS[command], tmp_path / "a")
    b, rows_b = run_cli(command, SMALL_RUNS[command], tmp_path / "b")
    a.pop("wall_time"), b.pop("wall_time")
    a["params"].pop("out"), b["params"].pop("out")
    assert a == b and rows_a == rows_b


def test_search_auto(tmp_path):
    record, rows = run_cli("search", ["--n", "5", "--m", "13", "--gamma", "auto", "--tf", "auto"], tmp_path)
    res = record["results"]
    assert res["t_f"] == pytest.approx(3 * math.pi * math.sqrt(32) / 2)
    assert len(res["gamma_grid"]) == 25
    assert res["gamma_grid"][0] == pytest.approx(1e-2 / 5) and res["gamma_grid"][-1] == pytest.approx(10 / 5)
    assert 0.5 < res["peak_prob"] <= 1 and len(res["samples"]) == 100
    assert float(rows[-1][0]) == pytest.approx(res["t_f"])


def test_encode_table_content(tmp_path):
    _, rows = run_cli("encode-table", ["--max-n", "8"], tmp_path)
    for n, row in enumerate(rows[1:], start=1):
        assert row == [str(n), str(2**n), str(2**n), str(n)]
    assert rows[3] == ["3", "8", "8", "3"]


def test_gapscan_sorted_and_consistent(tmp_path):
    record, rows = run_cli("gapscan", ["--n", "4", "--m", "13"], tmp_path)
    data = np.array(rows[1:], dtype=float)
    assert np.all(np.diff(data[:, 0]) > 0)
    np.testing.assert_allclose(data[:, 3], data[:, 2] - data[:, 1], atol=1e-12)
    assert record["results"]["gap_min"] <= data[:, 3].min() + 1e-12


def test_gapscan_batch(tmp_path):
    record, rows = run_cli("gapscan", ["--n-range", "4..6", "--m", "1"], tmp_path)
    assert rows[0] == ["n", "N", "gamma", "s_star", "gap_min"]
    assert [r[0] for r in rows[1:]] == ["4", "5", "6"]
    assert record["results"]["exponent"] < 0


def test_scaling_gap_small(tmp_path):
    record, rows = run_cli("scaling", ["--protocol", "gap", "--n-range", "3..5"], tmp_path)
    assert rows[0] == ["n", "N", "gamma", "s_star", "gap_min"]
    assert "exponent" in record["results"]


def test_scaling_search_small(tmp_path):
    record, rows = run_cli("scaling", ["--n-range", "3,4", "--samples", "64"], tmp_path)
    assert rows[0] == ["n", "N", "gamma_star", "t_star", "peak"]
    assert len(rows) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "encode-table", "params": {"max_n": 4, "out": str(tmp_path / "x")}}))
    assert main(["--config", str(cfg)]) == 0
    assert len(read_csv(tmp_path / "x" / "encode-table.csv")) == 5
    assert main(["encode-table", "--config", str(cfg), "--max-n", "6"]) == 0
    assert len(read_csv(tmp_path / "x" / "encode-table.csv")) == 7


@pytest.mark.parametrize(
    "payload",
    [
        {"command": "search", "params": {"n": 3, "bogus": 1}},
        {"command": "search", "params": {"n": 3}, "extra": 1},
        {"command": "warp", "params": {}},
        {"command": "search", "params": {"n": 3, "m": 8}},
        {"command": "search", "params": {"n": 3, "gamma": -1}},
        {"command": "gapscan", "params": {"n": 12}},
        {"command": "gapscan", "params": {}},
        {"command": "hybrid", "params": {"c": 2}},
        {"command": "scaling", "params": {"n_range": "8..6"}},
        {"command": "walk", "params": {"size": 10, "start": 10}},
        {"command": "search", "params": {"n": 2.5}},
    ],
)
def test_invalid_configs_exit_2(payload, tmp_path):
    payload.setdefault("params", {})["out"] = str(tmp_path / "o")
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    assert main(["--config", str(cfg)]) == 2
    assert not (tmp_path / "o").exists() or payload["command"] == "walk"


def test_bad_json_and_missing_command(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["--config", str(cfg)]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2
    assert main([]) == 2
    cfg.write_text(json.dumps({"command": "search", "params": {}}))
    assert main(["walk", "--config", str(cfg)]) == 2


def test_norm_drift_exit_3(monkeypatch, tmp_path):
    def boom(params):
        raise NormDriftError("drift")

    monkeypatch.setitem(cli.COMMANDS, "walk", boom)
    assert main(["walk", "--out", str(tmp_path)]) == 3


def test_io_failure_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["encode-table", "--out", str(blocker / "sub")]) == 4


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("CTWALK_THREADS", "1")
    assert cli._threads() == 1
    monkeypatch.setenv("CTWALK_THREADS", "many")
    with pytest.raises(ConfigError):
        cli._threads()


def test_parse_range():
    assert parse_range("6..10") == [6, 7, 8, 9, 10]
    assert parse_range("4,6") == [4, 6]
    assert parse_range([3, 5]) == [3, 5]
    for bad in ("5..3", "", "a..b", 7):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_validate_defaults():
    p = validate("search", {})
    assert p["gamma"] == "auto" and p["t_f"] == "auto" and p["seed"] == 0
    assert validate("walk", {"gamma": "2"})["gamma"] == 2.0
    with pytest.raises(ConfigError):
        validate("walk", {"gamma": True})


def test_top_level_flags_survive_subcommand(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "encode-table", "params": {"max_n": 3}}))
    assert main(["--config", str(cfg), "--out", str(tmp_path / "a"), "encode-table"]) == 0
    assert len(read_csv(tmp_path / "a" / "encode-table.csv")) == 4
    assert main(["--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "encode-table.json").exists()
