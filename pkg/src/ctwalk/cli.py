"""Command-line front end: ``ctwalk <command> [flags]`` or ``ctwalk --config file.json``.

Every command writes ``<out>/<command>.json`` (parameters, seed, version,
results) and, where a table applies, ``<out>/<command>.csv``.  Flags
override values read from a config file of the form
``{"command": ..., "params": {...}}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import stats

from . import __version__
from .dynamics import DEFAULT_SAMPLES, NormDriftError, Schedule, evolve_static, static_trajectory, basis_state
from .encode import encoding_cost
from .graphs import GRAPH_KINDS, make_graph
from .hamiltonians import sk_instance, walk_hamiltonian
from .protocols import (
    adiabatic_search,
    auto_gamma_grid,
    auto_horizon,
    gap_scaling,
    gap_scan,
    glued_trees_transport,
    hybrid_search,
    measure,
    optimal_gamma,
    qw_search,
    readout,
    repeated_short_runs,
    search_hamiltonian,
    search_scaling,
    tune_short_runs,
    uniform_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DRIFT = 3
EXIT_IO = 4

MAX_GAPSCAN_QUBITS = 11
# Long line walks run with the loosest budget the drift guard allows: a
# squared-norm loss of 1e-6 keeps the norm itself within 5e-7.
WALK_DRIFT_BUDGET = 1e-6
MAX_ENCODE_QUBITS = 62


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------------
# parameter parsing


def _int(name: str, lo: int | None = None, hi: int | None = None) -> Callable[[Any], int]:
    def conv(v: Any) -> int:
        if isinstance(v, bool):
            raise ConfigError(f"{name}: expected an integer, got {v!r}")
        try:
            x = int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected an integer, got {v!r}") from None
        if isinstance(v, float) and v != x:
            raise ConfigError(f"{name}: expected an integer, got {v!r}")
        if lo is not None and x < lo:
            raise ConfigError(f"{name}: must be >= {lo}")
        if hi is not None and x > hi:
            raise ConfigError(f"{name}: must be <= {hi}")
        return x

    return conv


def _pos(name: str, allow_auto: bool = False, allow_zero: bool = False) -> Callable[[Any], Any]:
    def conv(v: Any) -> Any:
        if allow_auto and v == "auto":
            return "auto"
        if isinstance(v, bool):
            raise ConfigError(f"{name}: expected a number, got {v!r}")
        try:
            x = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: expected a number{' or auto' if allow_auto else ''}, got {v!r}") from None
        if not math.isfinite(x) or x < 0 or (x == 0 and not allow_zero):
            raise ConfigError(f"{name}: must be positive")
        return x

    return conv


def _unit(name: str) -> Callable[[Any], float]:
    def conv(v: Any) -> float:
        x = _pos(name, allow_zero=True)(v)
        if x > 1:
            raise ConfigError(f"{name}: must lie in [0, 1]")
        return x

    return conv


def _choice(name: str, options: tuple[str, ...]) -> Callable[[Any], str]:
    def conv(v: Any) -> str:
        if v not in options:
            raise ConfigError(f"{name}: expected one of {', '.join(options)}, got {v!r}")
        return v

    return conv


def _optional(conv: Callable[[Any], Any]) -> Callable[[Any], Any]:
    return lambda v: None if v is None else conv(v)


def parse_range(text: Any, name: str = "n_range") -> list[int]:
    """``"6..10"`` (inclusive), ``"4,6,8"`` or a list of integers."""
    if isinstance(text, (list, tuple)):
        values = [_int(name, 1)(v) for v in text]
    elif isinstance(text, str) and ".." in text:
        lo, _, hi = text.partition("..")
        a, b = _int(name, 1)(lo.strip()), _int(name, 1)(hi.strip())
        if b < a:
            raise ConfigError(f"{name}: empty range {text!r}")
        values = list(range(a, b + 1))
    elif isinstance(text, str):
        values = [_int(name, 1)(v.strip()) for v in text.split(",") if v.strip()]
    else:
        raise ConfigError(f"{name}: expected 'a..b', a comma list or a JSON list")
    if not values:
        raise ConfigError(f"{name}: empty range")
    return values


def _range(name: str, hi: int) -> Callable[[Any], list[int]]:
    def conv(v: Any) -> list[int]:
        values = parse_range(v, name)
        if max(values) > hi:
            raise ConfigError(f"{name}: sizes above {hi} are not supported")
        return values

    return conv


_COMMON = {
    "seed": (0, _int("seed", 0)),
    "out": ("results", str),
}

SCHEMAS: dict[str, dict[str, tuple[Any, Callable[[Any], Any]]]] = {
    "walk": {
        "graph": ("line", _choice("graph", tuple(k for k in GRAPH_KINDS if k != "custom"))),
        "size": (513, _int("size", 1)),
        "gamma": (1.0, _pos("gamma")),
        "t_f": (100.0, _pos("t_f")),
        "start": (None, _optional(_int("start", 0))),
        "samples": (DEFAULT_SAMPLES, _int("samples", 2)),
    },
    "search": {
        "n": (6, _int("n", 1, 24)),
        "m": (0, _int("m", 0)),
        "gamma": ("auto", _pos("gamma", allow_auto=True)),
        "t_f": ("auto", _pos("t_f", allow_auto=True)),
        "graph": ("hypercube", _choice("graph", ("hypercube", "complete"))),
        "shots": (100, _int("shots", 0)),
        "samples": (DEFAULT_SAMPLES, _int("samples", 2)),
    },
    "adiabatic": {
        "n": (4, _int("n", 1, 24)),
        "m": (0, _int("m", 0)),
        "t_f": (64.0, _pos("t_f")),
        "gamma": (None, _optional(_pos("gamma"))),
        "shots": (100, _int("shots", 0)),
        "samples": (DEFAULT_SAMPLES, _int("samples", 2)),
    },
    "hybrid": {
        "n": (4, _int("n", 1, 24)),
        "m": (0, _int("m", 0)),
        "t_f": (64.0, _pos("t_f")),
        "schedule": ("hybrid_parametric", _choice("schedule", ("hybrid_parametric", "adiabatic_linear", "qw_constant"))),
        "c": (0.5, _unit("c")),
        "gamma": (None, _optional(_pos("gamma"))),
        "shots": (100, _int("shots", 0)),
        "samples": (DEFAULT_SAMPLES, _int("samples", 2)),
    },
    "gapscan": {
        "n": (None, _optional(_int("n", 1, MAX_GAPSCAN_QUBITS))),
        "n_range": (None, _optional(_range("n_range", MAX_GAPSCAN_QUBITS))),
        "m": (0, _int("m", 0)),
        "gamma": (None, _optional(_pos("gamma"))),
        "resolution": (64, _int("resolution", 16)),
    },
    "sk-sample": {
        "n": (5, _int("n", 2, 16)),
        "instance_seed": (None, _optional(_int("instance_seed", 0))),
        "shots": (200, _int("shots", 1)),
        "gamma": ("auto", _pos("gamma", allow_auto=True)),
        "t_run": ("auto", _pos("t_run", allow_auto=True)),
    },
    "glued-trees": {
        "depth": (2, _int("depth", 1, 12)),
        "gamma": (1.0, _pos("gamma")),
        "t_f": (20.0, _pos("t_f")),
        "samples": (201, _int("samples", 2)),
    },
    "encode-table": {
        "max_n": (20, _int("max_n", 1, MAX_ENCODE_QUBITS)),
    },
    "scaling": {
        "protocol": ("qw-search", _choice("protocol", ("qw-search", "gap"))),
        "n_range": ("6..10", _range("n_range", 24)),
        "m": (0, _int("m", 0)),
        "samples": (DEFAULT_SAMPLES, _int("samples", 2)),
    },
}


def validate(command: str, raw: dict[str, Any]) -> dict[str, Any]:
    """Fill defaults, convert and range-check a parameter record."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = {**SCHEMAS[command], **_COMMON}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {command}: {', '.join(unknown)}")
    params = {}
    for key, (default, conv) in schema.items():
        params[key] = conv(raw[key]) if key in raw and raw[key] is not None else default
    _cross_check(command, params)
    return params


def _cross_check(command: str, p: dict[str, Any]) -> None:
    if "n" in p and "m" in p and p["n"] is not None and p["m"] >= 1 << p["n"]:
        raise ConfigError(f"m = {p['m']} out of range for n = {p['n']}")
    if command == "walk":
        if p["graph"] == "glued_trees" and p["size"] > 12:
            raise ConfigError("glued_trees depth must be <= 12")
        if p["graph"] == "hypercube" and p["size"] > 20:
            raise ConfigError("hypercube walk dimension must be <= 20")
        if p["graph"] == "cycle" and p["size"] < 3:
            raise ConfigError("cycle needs at least 3 vertices")
    if command == "gapscan":
        if (p["n"] is None) == (p["n_range"] is None):
            raise ConfigError("gapscan needs exactly one of n or n_range")
        if p["n_range"] is not None and p["m"] >= 1 << min(p["n_range"]):
            raise ConfigError(f"m = {p['m']} out of range for the smallest n")
    if command == "scaling" and p["m"] >= 1 << min(p["n_range"]):
        raise ConfigError(f"m = {p['m']} out of range for the smallest n")


def load_config(path: str) -> tuple[str, dict[str, Any]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    extra = sorted(set(data) - {"command", "params"})
    if extra:
        raise ConfigError(f"unknown top-level key(s) in config: {', '.join(extra)}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("config params must be a JSON object")
    return data.get("command"), params


# ----------------------------------------------------------------------------
# output


def _threads() -> int:
    cap = os.environ.get("CTWALK_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"CTWALK_THREADS must be an integer, got {cap!r}") from None
    return n


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_outputs(
    out: Path,
    command: str,
    params: dict[str, Any],
    results: dict[str, Any],
    wall_time: float,
    table: tuple[list[str], list[list[Any]]] | None,
) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    record = {
        "command": command,
        "params": params,
        "seed": params["seed"],
        "version": __version__,
        "results": results,
        "wall_time": wall_time,
    }
    if table is not None:
        header, rows = table
        csv_path = out / f"{command}.csv"
        with csv_path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        record["csv"] = csv_path.name
        written.append(csv_path)
    json_path = out / f"{command}.json"
    json_path.write_text(json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.insert(0, json_path)
    return written


# ----------------------------------------------------------------------------
# commands

Table = tuple[list[str], list[list[Any]]]


def _samples_at(psi: np.ndarray, shots: int, seed: int, n: int) -> list[str]:
    if shots == 0:
        return []
    return readout(measure(psi / np.linalg.norm(psi), shots, seed), n)


def cmd_walk(p: dict[str, Any]) -> tuple[dict, Table]:
    g = make_graph(p["graph"], p["size"], p["seed"] if p["graph"] == "glued_trees" else None)
    N = g.num_vertices
    start = N // 2 if p["start"] is None else p["start"]
    if start >= N:
        raise ConfigError(f"start vertex {start} out of range for {N} vertices")
    x = np.arange(N, dtype=np.float64)

    def observe(s: np.ndarray) -> tuple[float, float, float]:
        prob = np.abs(s) ** 2
        total = prob.sum()
        mean = prob @ x / total
        var = prob @ (x - mean) ** 2 / total
        return math.sqrt(total), math.sqrt(max(var, 0.0)), float(prob[start])

    h = walk_hamiltonian(g, p["gamma"])
    times = np.linspace(0.0, p["t_f"], p["samples"])
    traj = static_trajectory(h, basis_state(start, N), times, observe=observe, rk4_tol=WALK_DRIFT_BUDGET)
    vals = np.asarray(traj.values)
    rows = [[t, v[0], v[1], v[2]] for t, v in zip(traj.times.tolist(), vals.tolist())]
    results = {
        "num_vertices": N,
        "start": start,
        "method": traj.method,
        "max_norm_drift": float(np.abs(vals[:, 0] - 1.0).max()),
        "final_sigma": float(vals[-1, 1]),
    }
    return results, (["t", "norm", "sigma", "p_start"], rows)


def _trace_rows(res, with_ground: bool) -> list[list[Any]]:
    rows = []
    for i, t in enumerate(res.times.tolist()):
        row = [t, float(res.success[i]), float(res.norms[i])]
        if with_ground:
            row.append(float(res.ground_fidelity[i]) if res.ground_fidelity is not None else "")
        rows.append(row)
    return rows


def cmd_search(p: dict[str, Any]) -> tuple[dict, Table]:
    n, m = p["n"], p["m"]
    N = 1 << n
    graph = make_graph("complete", N) if p["graph"] == "complete" else None
    t_f = auto_horizon(N) if p["t_f"] == "auto" else p["t_f"]
    results: dict[str, Any] = {"t_f": t_f}
    if p["gamma"] == "auto":
        grid = auto_gamma_grid(n)
        tuned = optimal_gamma(n, m, grid, t_f, graph=graph, refine=True, samples=p["samples"], workers=_threads())
        gamma = tuned.gamma
        results["gamma_grid"] = grid.tolist()
    else:
        gamma = p["gamma"]
    res = qw_search(n, m, gamma, t_f, graph=graph, samples=p["samples"])
    results.update(
        gamma=gamma,
        t_star=res.t_peak,
        peak_prob=res.peak_prob,
        final_fidelity=res.final_fidelity,
        expected_t=math.pi * math.sqrt(N) / 2.0,
    )
    if p["shots"]:
        psi = evolve_static(search_hamiltonian(n, m, gamma, graph), uniform_state(N), res.t_peak)
        samples = _samples_at(psi, p["shots"], p["seed"], n)
        results["samples"] = samples
        results["hit_rate"] = samples.count(format(m, f"0{n}b")) / len(samples)
    return results, (["t", "prob_m", "norm"], _trace_rows(res, False))


def _scheduled_outputs(res, p: dict[str, Any], sched: Schedule) -> tuple[dict, Table]:
    n = p["n"]
    results: dict[str, Any] = {
        "gamma": res.params["gamma"],
        "schedule": sched.to_dict(),
        "final_fidelity": res.final_fidelity,
        "peak_prob": res.peak_prob,
        "t_peak": res.t_peak,
    }
    if res.ground_fidelity is not None:
        results["final_ground_fidelity"] = float(res.ground_fidelity[-1])
    if p["shots"]:
        samples = _samples_at(res.final_state, p["shots"], p["seed"], n)
        results["samples"] = samples
        results["hit_rate"] = samples.count(format(p["m"], f"0{n}b")) / len(samples)
    return results, (["t", "prob_m", "norm", "ground_fidelity"], _trace_rows(res, True))


def cmd_adiabatic(p: dict[str, Any]) -> tuple[dict, Table]:
    sched = Schedule.linear(p["t_f"])
    res = adiabatic_search(p["n"], p["m"], p["t_f"], sched, gamma=p["gamma"], samples=p["samples"])
    return _scheduled_outputs(res, p, sched)


def cmd_hybrid(p: dict[str, Any]) -> tuple[dict, Table]:
    if p["schedule"] == "hybrid_parametric":
        sched = Schedule.hybrid(p["t_f"], p["c"])
    elif p["schedule"] == "adiabatic_linear":
        sched = Schedule.linear(p["t_f"])
    else:
        sched = Schedule.constant(p["t_f"])
    res = hybrid_search(p["n"], p["m"], sched, p["gamma"], samples=p["samples"])
    return _scheduled_outputs(res, p, sched)


def cmd_gapscan(p: dict[str, Any]) -> tuple[dict, Table]:
    if p["n"] is not None:
        s, e0, e1, gap = gap_scan(p["n"], p["m"], gamma=p["gamma"], resolution=p["resolution"])
        results = {
            "gamma": 1.0 / p["n"] if p["gamma"] is None else p["gamma"],
            "s_star": gap.s_star,
            "gap_min": gap.gap_min,
            "degenerate": gap.degenerate,
        }
        rows = [[a, b, c, c - b] for a, b, c in zip(s.tolist(), e0.tolist(), e1.tolist())]
        return results, (["s", "E0", "E1", "gap"], rows)
    rows_, fit = gap_scaling(p["n_range"], p["m"], gamma=p["gamma"], resolution=p["resolution"])
    results = {"rows": rows_, "exponent": fit.exponent, "prefactor": fit.prefactor, "r_squared": fit.r_squared}
    header = ["n", "N", "gamma", "s_star", "gap_min"]
    return results, (header, [[r[k] for k in header] for r in rows_])


SK_T_GRID = np.linspace(0.1, 5.0, 50)


def cmd_sk_sample(p: dict[str, Any]) -> tuple[dict, Table]:
    n = p["n"]
    inst_seed = p["seed"] if p["instance_seed"] is None else p["instance_seed"]
    inst = sk_instance(n, inst_seed)
    h = inst.hamiltonian()
    gamma, t_run = p["gamma"], p["t_run"]
    if gamma == "auto" or t_run == "auto":
        g_grid = auto_gamma_grid(n) if gamma == "auto" else [gamma]
        t_grid = SK_T_GRID if t_run == "auto" else [t_run]
        gamma, t_run, mean_e = tune_short_runs(h, n, g_grid, t_grid)
    res = repeated_short_runs(h, n, gamma, t_run, p["shots"], p["seed"])
    hits = int(round(res.hit_rate * p["shots"]))
    baseline = len(res.ground_states) / (1 << n)
    test = stats.binomtest(hits, p["shots"], baseline, alternative="greater")
    results = {
        "instance": json.loads(inst.to_json()),
        "instance_seed": inst_seed,
        "gamma": gamma,
        "t_run": t_run,
        "best_bits": res.best_bits,
        "best_index": res.best_index,
        "energy_of_best": res.energy_of_best,
        "ground_states": [format(j, f"0{n}b") for j in res.ground_states],
        "ground_energy": float(h.values[res.ground_states[0]]),
        "hits": hits,
        "hit_rate": res.hit_rate,
        "ground_probability": res.ground_probability,
        "uniform_baseline": baseline,
        "p_value": float(test.pvalue),
    }
    rows = [[i, int(j), format(int(j), f"0{n}b"), float(h.values[j])] for i, j in enumerate(res.samples)]
    return results, (["shot", "index", "bits", "energy"], rows)


def cmd_glued_trees(p: dict[str, Any]) -> tuple[dict, Table]:
    times = np.linspace(0.0, p["t_f"], p["samples"])
    rows = glued_trees_transport(p["depth"], times, p["seed"], p["gamma"])
    N = 2 * (2 ** (p["depth"] + 1) - 1)
    i = int(np.argmax(rows[:, 1]))
    results = {
        "num_vertices": N,
        "max_exit_prob": float(rows[i, 1]),
        "t_max": float(rows[i, 0]),
        "uniform_baseline": 1.0 / N,
    }
    return results, (["t", "p_exit"], rows.tolist())


def cmd_encode_table(p: dict[str, Any]) -> tuple[dict, Table]:
    rows = []
    for n in range(1, p["max_n"] + 1):
        cost = encoding_cost(1 << n)
        rows.append([n, 1 << n, cost.unary_symbols, cost.binary_bits])
    return {"max_n": p["max_n"]}, (["n", "N", "unary_symbols", "binary_bits"], rows)


def cmd_scaling(p: dict[str, Any]) -> tuple[dict, Table]:
    if p["protocol"] == "qw-search":
        rows_, fit = search_scaling(p["n_range"], p["m"], samples=p["samples"], workers=_threads())
        header = ["n", "N", "gamma_star", "t_star", "peak"]
    else:
        bad = [n for n in p["n_range"] if n > MAX_GAPSCAN_QUBITS]
        if bad:
            raise ConfigError(f"gap scaling supports n <= {MAX_GAPSCAN_QUBITS}")
        rows_, fit = gap_scaling(p["n_range"], p["m"])
        header = ["n", "N", "gamma", "s_star", "gap_min"]
    results = {"rows": rows_, "exponent": fit.exponent, "prefactor": fit.prefactor, "r_squared": fit.r_squared}
    return results, (header, [[r[k] for k in header] for r in rows_])


COMMANDS: dict[str, Callable[[dict[str, Any]], tuple[dict, Table | None]]] = {
    "walk": cmd_walk,
    "search": cmd_search,
    "adiabatic": cmd_adiabatic,
    "hybrid": cmd_hybrid,
    "gapscan": cmd_gapscan,
    "sk-sample": cmd_sk_sample,
    "glued-trees": cmd_glued_trees,
    "encode-table": cmd_encode_table,
    "scaling": cmd_scaling,
}


def run(command: str, raw: dict[str, Any]) -> tuple[dict[str, Any], list[Path]]:
    """Validate, execute and persist one experiment; returns (record, files)."""
    params = validate(command, raw)
    start = time.perf_counter()
    try:
        results, table = COMMANDS[command](params)
    except (ValueError, NotImplementedError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    wall = time.perf_counter() - start
    files = write_outputs(Path(params["out"]), command, params, results, wall, table)
    return {"params": params, "results": results}, files


# ----------------------------------------------------------------------------
# argparse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctwalk", description="Continuous-time quantum walk experiments.")
    parser.add_argument("--config", dest="top_config", help="JSON file {\"command\": ..., \"params\": {...}}")
    parser.add_argument("--version", action="version", version=f"ctwalk {__version__}")
    # separate dests: subparser defaults would otherwise overwrite these
    parser.add_argument("--out", dest="top_out", help="output directory")
    parser.add_argument("--seed", dest="top_seed", help="RNG seed")
    sub = parser.add_subparsers(dest="command")

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="JSON config; flags override its params")
        sp.add_argument("--seed", help="RNG seed (default 0)")
        sp.add_argument("--out", help="output directory (default ./results)")
        sp.add_argument("--samples", help="trace sample count (default 256)")

    sp = sub.add_parser("walk", help="walk on a graph, record spread")
    common(sp)
    sp.add_argument("--graph", help="line, cycle, complete, hypercube or glued_trees")
    sp.add_argument("--size", help="vertices (line/cycle/complete), dimension or depth")
    sp.add_argument("--gamma")
    sp.add_argument("--tf", dest="t_f")
    sp.add_argument("--start", help="initial vertex (default: middle)")

    sp = sub.add_parser("search", help="quantum-walk search on the hypercube")
    common(sp)
    sp.add_argument("--n")
    sp.add_argument("--m")
    sp.add_argument("--gamma", help="rate or 'auto'")
    sp.add_argument("--tf", dest="t_f", help="duration or 'auto'")
    sp.add_argument("--graph", help="hypercube (default) or complete")
    sp.add_argument("--shots", help="measurements at the peak time (default 100)")

    for name, text in (("adiabatic", "linear annealing search"), ("hybrid", "interpolated search")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--n")
        sp.add_argument("--m")
        sp.add_argument("--tf", dest="t_f")
        sp.add_argument("--gamma", help="walk rate (default 1/n)")
        sp.add_argument("--shots", help="final-state measurements (default 100)")
        if name == "hybrid":
            sp.add_argument("--schedule", help="hybrid_parametric, adiabatic_linear or qw_constant")
            sp.add_argument("--c", help="interpolation knob in [0, 1]")

    sp = sub.add_parser("gapscan", help="ground-state gap along the interpolation")
    common(sp)
    sp.add_argument("--n")
    sp.add_argument("--n-range", dest="n_range", help="e.g. 4..10")
    sp.add_argument("--m")
    sp.add_argument("--gamma", help="walk rate (default 1/n)")
    sp.add_argument("--resolution", help="scan points (default 64)")

    sp = sub.add_parser("sk-sample", help="repeated short runs on an SK spin glass")
    common(sp)
    sp.add_argument("--n")
    sp.add_argument("--instance-seed", dest="instance_seed", help="default: --seed")
    sp.add_argument("--shots")
    sp.add_argument("--gamma", help="rate or 'auto'")
    sp.add_argument("--t-run", dest="t_run", help="run time or 'auto'")

    sp = sub.add_parser("glued-trees", help="entrance-to-exit transport")
    common(sp)
    sp.add_argument("--depth")
    sp.add_argument("--gamma")
    sp.add_argument("--tf", dest="t_f")

    sp = sub.add_parser("encode-table", help="unary versus binary register cost")
    common(sp)
    sp.add_argument("--max-n", dest="max_n")

    sp = sub.add_parser("scaling", help="size sweep with power-law fit")
    common(sp)
    sp.add_argument("--protocol", help="qw-search or gap")
    sp.add_argument("--n-range", dest="n_range", help="e.g. 6..10")
    sp.add_argument("--m")
    return parser


def _coerce_flag(value: str) -> Any:
    # flags arrive as strings; JSON-decode numbers so both routes validate alike
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None) or args.pop("top_config", None)
    args.pop("top_config", None)
    for key in ("out", "seed"):
        top = args.pop(f"top_{key}", None)
        if args.get(key) is None and top is not None:
            args[key] = top
    try:
        raw: dict[str, Any] = {}
        if config_path:
            file_command, raw = load_config(config_path)
            if command is None:
                command = file_command
            elif file_command is not None and file_command != command:
                raise ConfigError(f"config is for {file_command!r}, not {command!r}")
        if command is None:
            parser.print_usage(sys.stderr)
            raise ConfigError("no command given")
        flags = {k: _coerce_flag(v) for k, v in args.items() if v is not None}
        if command == "scaling" or command == "gapscan":
            if "n_range" in flags and not isinstance(flags["n_range"], str):
                flags["n_range"] = str(flags["n_range"])
        raw = {**raw, **flags}
        record, files = run(command, raw)
    except ConfigError as exc:
        print(f"ctwalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NormDriftError as exc:
        print(f"ctwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DRIFT
    except OSError as exc:
        print(f"ctwalk: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
