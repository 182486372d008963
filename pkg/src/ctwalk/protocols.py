"""End-to-end search, annealing, sampling and transport protocols."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import (
    DEFAULT_SAMPLES,
    DRIFT_BUDGET,
    MAX_DENSE,
    GapResult,
    Schedule,
    equal_superposition,
    basis_state,
    evolve_scheduled,
    evolve_static,
    gap_curve,
    min_gap,
    golden_section_min,
    static_trajectory,
)
from .encode import index_to_bits
from .graphs import Graph, make_graph
from .hamiltonians import (
    DiagonalHamiltonian,
    Hamiltonian,
    add,
    hypercube_qubit_hamiltonian,
    marked_hamiltonian,
    walk_hamiltonian,
)

__all__ = [
    "RunResult",
    "GammaTuning",
    "ShortRunResult",
    "ScalingFit",
    "auto_gamma_grid",
    "auto_horizon",
    "uniform_state",
    "search_hamiltonian",
    "peak_of_trace",
    "qw_search",
    "optimal_gamma",
    "adiabatic_search",
    "hybrid_search",
    "sufficient_time",
    "tune_short_runs",
    "repeated_short_runs",
    "glued_trees_transport",
    "measure",
    "readout",
    "success_probability",
    "search_scaling",
    "gap_scan",
    "gap_scaling",
    "fit_power_law",
]

MEASURE_NORM_TOL = 1e-6
GROUND_TRACE_LIMIT = 256


@dataclass
class RunResult:
    """Record of one protocol execution.

    ``success`` holds ``|<m|psi(t)>|^2`` at ``times``; ``ground_fidelity``
    (scheduled runs on small registers) the overlap with the instantaneous
    ground state.  ``wall_time`` is the only non-deterministic field.
    """

    params: dict
    times: np.ndarray
    success: np.ndarray
    norms: np.ndarray
    final_fidelity: float
    peak_prob: float
    t_peak: float
    ground_fidelity: np.ndarray | None = None
    samples: list[str] | None = None
    wall_time: float = 0.0
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def trace(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.success.tolist()))

    def to_dict(self, include_trace: bool = True) -> dict:
        out = {
            "params": self.params,
            "final_fidelity": self.final_fidelity,
            "peak_prob": self.peak_prob,
            "t_peak": self.t_peak,
            "samples": self.samples,
            "wall_time": self.wall_time,
        }
        if include_trace:
            out["trace"] = {
                "t": self.times.tolist(),
                "prob_m": self.success.tolist(),
                "norm": self.norms.tolist(),
            }
            if self.ground_fidelity is not None:
                out["trace"]["ground_fidelity"] = self.ground_fidelity.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class GammaTuning(NamedTuple):
    gamma: float
    peak_prob: float
    t_peak: float


class ShortRunResult(NamedTuple):
    best_index: int
    best_bits: str
    energy_of_best: float
    hit_rate: float
    ground_states: tuple[int, ...]
    ground_probability: float
    samples: np.ndarray


class ScalingFit(NamedTuple):
    exponent: float
    prefactor: float
    r_squared: float


def auto_gamma_grid(n: int) -> np.ndarray:
    """25 log-spaced rates spanning ``[1e-2, 1e1] / n``."""
    return np.logspace(-2.0, 1.0, 25) / n


def auto_horizon(N: int) -> float:
    """Three times the expected search time ``pi sqrt(N) / 2``."""
    return 3.0 * math.pi * math.sqrt(N) / 2.0


def peak_of_trace(times: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """First maximum of a sampled trace, refined by a parabola through its neighbours."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    top = values.max()
    i = int(np.flatnonzero(values >= top - 1e-12)[0])
    if i == 0 or i == values.size - 1:
        return float(times[i]), float(values[i])
    t0, t1, t2 = times[i - 1 : i + 2]
    y0, y1, y2 = values[i - 1 : i + 2]
    denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
    a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / denom
    b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / denom
    if a >= 0:
        return float(t1), float(y1)
    t_star = -b / (2.0 * a)
    if not t0 <= t_star <= t2:
        return float(t1), float(y1)
    c = y1 - a * t1 * t1 - b * t1
    y_star = a * t_star * t_star + b * t_star + c
    return float(t_star), float(min(max(y_star, y1), 1.0))


def uniform_state(N: int) -> np.ndarray:
    return np.full(N, N ** -0.5, dtype=np.complex128)


def search_hamiltonian(n: int, m: int, gamma: float, graph: Graph | None) -> Hamiltonian:
    N = 1 << n
    if graph is None:
        walk = hypercube_qubit_hamiltonian(n, gamma)
    else:
        if graph.num_vertices != N:
            raise ValueError(f"graph has {graph.num_vertices} vertices, expected {N}")
        walk = walk_hamiltonian(graph, gamma)
    return add(walk, marked_hamiltonian(N, m))


def qw_search(
    n: int,
    m: int,
    gamma: float,
    t_f: float,
    *,
    graph: Graph | None = None,
    samples: int = DEFAULT_SAMPLES,
    rk4_tol: float = DRIFT_BUDGET,
) -> RunResult:
    """Quantum-walk search: evolve the uniform state under ``H_walk + (1 - |m><m|)``.

    The walk is the hypercube unless ``graph`` (with ``2^n`` vertices) is
    supplied.
    """
    N = 1 << n
    if not 0 <= m < N:
        raise ValueError(f"marked index {m} out of range for {n} qubits")
    if not (gamma > 0 and t_f > 0):
        raise ValueError("gamma and t_f must be positive")
    start = time.perf_counter()
    h = search_hamiltonian(n, m, gamma, graph)
    times = np.linspace(0.0, t_f, samples)
    traj = static_trajectory(h, uniform_state(N), times, observe=lambda s: abs(s[m]) ** 2, rk4_tol=rk4_tol)
    t_peak, p_peak = peak_of_trace(traj.times, traj.values)
    params = {
        "protocol": "qw_search",
        "n": n,
        "m": m,
        "gamma": float(gamma),
        "t_f": float(t_f),
        "graph": "hypercube" if graph is None else graph.kind,
        "schedule": "qw_constant",
        "samples": samples,
    }
    return RunResult(
        params,
        traj.times,
        np.asarray(traj.values, dtype=np.float64),
        traj.norms,
        float(traj.values[-1]),
        p_peak,
        t_peak,
        wall_time=time.perf_counter() - start,
        final_state=traj.final_state,
    )


def optimal_gamma(
    n: int,
    m: int,
    gamma_grid: Sequence[float],
    horizon: float,
    *,
    graph: Graph | None = None,
    refine: bool = False,
    samples: int = DEFAULT_SAMPLES,
    workers: int = 1,
) -> GammaTuning:
    """Transition rate maximising the peak success probability up to ``horizon``.

    Ties go to the smaller rate.  With ``refine`` the best grid point is
    polished by golden-section search in ``log gamma`` between its grid
    neighbours; the refined value is kept only if it beats the grid.
    """
    grid = np.sort(np.asarray(gamma_grid, dtype=np.float64))
    if grid.size == 0:
        raise ValueError("gamma grid is empty")
    if horizon <= 0:
        raise ValueError("horizon must be positive")

    def run(g: float) -> RunResult:
        return qw_search(n, m, float(g), horizon, graph=graph, samples=samples)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, grid))
    else:
        results = [run(g) for g in grid]
    peaks = np.array([r.peak_prob for r in results])
    i = int(np.flatnonzero(peaks >= peaks.max() - 1e-12)[0])
    best = GammaTuning(float(grid[i]), results[i].peak_prob, results[i].t_peak)
    if not refine or grid.size < 2:
        return best

    cache: dict[float, RunResult] = {}

    def negative_peak(log_g: float) -> float:
        cache[log_g] = run(math.exp(log_g))
        return -cache[log_g].peak_prob

    lo = math.log(grid[max(i - 1, 0)])
    hi = math.log(grid[min(i + 1, grid.size - 1)])
    log_g, _ = golden_section_min(negative_peak, lo, hi, rtol=1e-4)
    refined = cache[log_g]
    if refined.peak_prob > best.peak_prob:
        return GammaTuning(math.exp(log_g), refined.peak_prob, refined.t_peak)
    return best


def _scheduled_search(
    n: int,
    m: int,
    sched: Schedule,
    gamma: float | None,
    samples: int,
    protocol: str,
    rk4_tol: float,
) -> RunResult:
    N = 1 << n
    if not 0 <= m < N:
        raise ValueError(f"marked index {m} out of range for {n} qubits")
    gamma = 1.0 / n if gamma is None else float(gamma)
    start = time.perf_counter()
    h_walk = hypercube_qubit_hamiltonian(n, gamma)
    h_marked = marked_hamiltonian(N, m)
    small = N <= GROUND_TRACE_LIMIT
    traj = evolve_scheduled(
        h_walk,
        h_marked,
        sched,
        equal_superposition(n),
        samples=samples,
        observe=None if small else (lambda s: abs(s[m]) ** 2),
        rk4_tol=rk4_tol,
    )
    if small:
        states = traj.values
        success = np.abs(states[:, m]) ** 2
        walk_dense, marked_dense = h_walk.to_dense(), h_marked.to_dense()
        a, b = sched.weights(traj.times)
        ground = np.empty(traj.times.size)
        for i in range(traj.times.size):
            _, vecs = np.linalg.eigh(a[i] * walk_dense + b[i] * marked_dense)
            ground[i] = abs(np.vdot(vecs[:, 0], states[i])) ** 2
    else:
        success = np.asarray(traj.values, dtype=np.float64)
        ground = None
    t_peak, p_peak = peak_of_trace(traj.times, success)
    params = {
        "protocol": protocol,
        "n": n,
        "m": m,
        "gamma": gamma,
        "t_f": float(sched.t_f),
        "schedule": sched.family,
        "c": float(sched.c),
        "samples": samples,
    }
    return RunResult(
        params,
        traj.times,
        success,
        traj.norms,
        float(success[-1]),
        p_peak,
        t_peak,
        ground_fidelity=ground,
        wall_time=time.perf_counter() - start,
        final_state=traj.final_state,
    )


def adiabatic_search(
    n: int,
    m: int,
    t_f: float,
    sched: Schedule | None = None,
    *,
    gamma: float | None = None,
    samples: int = DEFAULT_SAMPLES,
    rk4_tol: float = DRIFT_BUDGET,
) -> RunResult:
    """Anneal from the hypercube walk to ``1 - |m><m|`` (linear ramp by default).

    ``gamma`` defaults to ``1 / n``.
    """
    sched = Schedule.linear(t_f) if sched is None else sched
    if sched.family == "qw_constant":
        raise ValueError("adiabatic search needs a schedule with A(t_f) = B(0) = 0")
    if not math.isclose(sched.t_f, t_f):
        raise ValueError("schedule t_f does not match t_f")
    return _scheduled_search(n, m, sched, gamma, samples, "adiabatic_search", rk4_tol)


def hybrid_search(
    n: int,
    m: int,
    sched: Schedule,
    gamma: float | None = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    rk4_tol: float = DRIFT_BUDGET,
) -> RunResult:
    """Search under ``A(t) H_walk + B(t) H_marked`` for any schedule family."""
    return _scheduled_search(n, m, sched, gamma, samples, "hybrid_search", rk4_tol)


def sufficient_time(
    n: int,
    m: int,
    target: float = 0.9,
    *,
    gamma: float | None = None,
    t_start: float = 1.0,
    t_max: float = 1e4,
) -> float:
    """Smallest doubling of ``t_start`` at which the linear anneal reaches ``target``."""
    t_f = t_start
    while t_f <= t_max:
        if adiabatic_search(n, m, t_f, gamma=gamma, samples=2).final_fidelity >= target:
            return t_f
        t_f *= 2.0
    raise RuntimeError(f"fidelity {target} not reached by t_f = {t_max:g}")


# ----------------------------------------------------------------------------
# measurement


def _probabilities(psi: np.ndarray) -> np.ndarray:
    probs = np.abs(np.asarray(psi)) ** 2
    total = probs.sum()
    if abs(total - 1.0) > MEASURE_NORM_TOL:
        raise ValueError(f"state is not normalised (norm^2 = {total:.9f})")
    return probs / total


def measure(psi: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Computational-basis outcomes drawn from ``|psi|^2``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = _probabilities(psi)
    rng = np.random.default_rng(seed)
    return rng.choice(probs.size, size=shots, p=probs)


def readout(indices: Sequence[int], n: int) -> list[str]:
    return [index_to_bits(int(j), n) for j in indices]


def success_probability(psi: np.ndarray, m: int) -> float:
    return float(abs(psi[m]) ** 2)


# ----------------------------------------------------------------------------
# repeated short runs on diagonal problems


def _ground_states(h_problem: DiagonalHamiltonian) -> np.ndarray:
    e = h_problem.values
    scale = max(1.0, float(np.abs(e).max()))
    return np.flatnonzero(e <= e.min() + 1e-12 * scale)


def tune_short_runs(
    h_problem: DiagonalHamiltonian,
    n: int,
    gamma_grid: Sequence[float],
    t_grid: Sequence[float],
) -> tuple[float, float, float]:
    """``(gamma, t_run, mean_energy)`` minimising the expected problem energy.

    Uses only the expected energy, never knowledge of the ground state.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0 or t_grid[0] <= 0:
        raise ValueError("run times must be positive")
    energies = h_problem.values
    best = (math.inf, 0.0, 0.0)
    for g in np.sort(np.asarray(gamma_grid, dtype=np.float64)):
        h = add(hypercube_qubit_hamiltonian(n, float(g)), h_problem)
        traj = static_trajectory(
            h, equal_superposition(n), t_grid, observe=lambda s: float(energies @ (np.abs(s) ** 2))
        )
        j = int(np.argmin(traj.values))
        if traj.values[j] < best[0]:
            best = (float(traj.values[j]), float(g), float(t_grid[j]))
    return best[1], best[2], best[0]


def repeated_short_runs(
    h_problem: DiagonalHamiltonian,
    n: int,
    gamma: float,
    t_run: float,
    shots: int,
    seed: int,
) -> ShortRunResult:
    """Repeat a short walk under ``H_walk + h_problem`` and keep the best sample.

    Every shot starts from the uniform state and runs for ``t_run``, so the
    pre-measurement state is shared; the shots differ only in their
    measurement outcome.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if t_run <= 0:
        raise ValueError("t_run must be positive")
    if h_problem.dimension != 1 << n:
        raise ValueError("problem Hamiltonian does not act on n qubits")
    h = add(hypercube_qubit_hamiltonian(n, gamma), h_problem)
    psi = evolve_static(h, equal_superposition(n), t_run)
    psi = psi / np.linalg.norm(psi)
    outcomes = measure(psi, shots, seed)
    energies = h_problem.values[outcomes]
    k = int(np.argmin(energies))
    ground = _ground_states(h_problem)
    hits = np.isin(outcomes, ground)
    return ShortRunResult(
        best_index=int(outcomes[k]),
        best_bits=index_to_bits(int(outcomes[k]), n),
        energy_of_best=float(energies[k]),
        hit_rate=float(hits.mean()),
        ground_states=tuple(int(j) for j in ground),
        ground_probability=float((np.abs(psi[ground]) ** 2).sum()),
        samples=outcomes,
    )


# ----------------------------------------------------------------------------
# glued trees


def glued_trees_transport(
    depth: int, t_grid: Sequence[float], seed: int, gamma: float = 1.0
) -> np.ndarray:
    """``(t, p_exit)`` rows for a walk released at the entrance root."""
    g = make_graph("glued_trees", depth, seed)
    h = walk_hamiltonian(g, gamma)
    entrance, exit_ = g.info["entrance"], g.info["exit"]
    traj = static_trajectory(
        h, basis_state(entrance, g.num_vertices), t_grid, observe=lambda s: abs(s[exit_]) ** 2
    )
    return np.column_stack([traj.times, traj.values])


# ----------------------------------------------------------------------------
# scaling studies


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> ScalingFit:
    """Least-squares fit of ``y = C x^p`` in log-log space."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    p, log_c = np.polyfit(lx, ly, 1)
    resid = ly - (p * lx + log_c)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(p), float(math.exp(log_c)), r2)


def search_scaling(
    n_values: Sequence[int],
    m: int = 0,
    *,
    refine: bool = True,
    samples: int = DEFAULT_SAMPLES,
    workers: int = 1,
) -> tuple[list[dict], ScalingFit]:
    """Tune gamma per register size and fit the peak time against ``N``."""
    rows = []
    for n in n_values:
        N = 1 << n
        tuned = optimal_gamma(
            n, m % N, auto_gamma_grid(n), auto_horizon(N), refine=refine, samples=samples, workers=workers
        )
        rows.append(
            {"n": n, "N": N, "gamma_star": tuned.gamma, "t_star": tuned.t_peak, "peak": tuned.peak_prob}
        )
    fit = fit_power_law([r["N"] for r in rows], [r["t_star"] for r in rows])
    return rows, fit


def gap_scaling(
    n_values: Sequence[int],
    m: int = 0,
    *,
    gamma: float | None = None,
    resolution: int = 64,
) -> tuple[list[dict], ScalingFit]:
    """Minimum gap of ``(1 - s) H_walk + s H_marked`` per size, fitted against ``N``.

    ``gamma`` defaults to ``1 / n`` for each size.
    """
    rows = []
    for n in n_values:
        N = 1 << n
        if N > MAX_DENSE:
            raise ValueError(f"n = {n} is too large for a dense gap scan")
        g = 1.0 / n if gamma is None else gamma
        res = min_gap(hypercube_qubit_hamiltonian(n, g), marked_hamiltonian(N, m % N), resolution)
        rows.append(
            {"n": n, "N": N, "gamma": g, "s_star": res.s_star, "gap_min": res.gap_min,
             "degenerate": res.degenerate}
        )
    fit = fit_power_law([r["N"] for r in rows], [r["gap_min"] for r in rows])
    return rows, fit


def gap_scan(
    n: int, m: int, *, gamma: float | None = None, resolution: int = 64
) -> tuple[np.ndarray, np.ndarray, np.ndarray, GapResult]:
    """Uniform ``s`` grid with the two lowest levels, plus the refined minimum."""
    N = 1 << n
    if N > MAX_DENSE:
        raise ValueError(f"n = {n} is too large for a dense gap scan")
    g = 1.0 / n if gamma is None else gamma
    hw, hp = hypercube_qubit_hamiltonian(n, g), marked_hamiltonian(N, m)
    s = np.linspace(0.0, 1.0, resolution)
    e0, e1 = gap_curve(hw, hp, s)
    return s, e0, e1, min_gap(hw, hp, resolution)
