"""States, schedules, time evolution and spectral scans.

Units are hbar = 1: a static Hamiltonian evolves states by ``exp(-i H t)``.

Backends
--------
``eig``
    exact propagation through a dense eigendecomposition (matrices up to
    ``MAX_DENSE``) or, for diagonal Hamiltonians, elementwise phases.
``rk4``
    fixed-step classical Runge-Kutta.  The step is ``z / ||H||_bound`` with
    ``z <= 0.05`` and additionally small enough that the worst-case RK4
    amplitude loss, ``T ||H|| z^5 / 72``, stays below ``DRIFT_BUDGET``.
    Banded sparse matrices are integrated on a window that follows the
    support of the state (light-cone truncation at ``WINDOW_TOL``).

``auto`` picks ``eig`` for every static Hamiltonian of dimension at most
``MAX_DENSE`` and ``rk4`` otherwise; scheduled evolution is always RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import _kernels
from .graphs import Graph
from .hamiltonians import (
    DiagonalHamiltonian,
    Hamiltonian,
    HypercubeHamiltonian,
    MatrixHamiltonian,
)

__all__ = [
    "NormDriftError",
    "SCHEDULE_FAMILIES",
    "Schedule",
    "Trajectory",
    "GapResult",
    "equal_superposition",
    "basis_state",
    "rk4_step_plan",
    "evolve_static",
    "static_trajectory",
    "evolve_scheduled",
    "spectrum",
    "gap_curve",
    "min_gap",
    "golden_section_min",
    "position_spread",
    "fidelity",
]

NORM_TOL = 1e-6
MAX_DENSE = 2048
RK4_MAX_Z = 0.05
DRIFT_BUDGET = 5e-9
WINDOW_TOL = 1e-25
DEFAULT_SAMPLES = 256


class NormDriftError(RuntimeError):
    """Integrated state lost or gained norm beyond ``NORM_TOL``."""


# ----------------------------------------------------------------------------
# states


def equal_superposition(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one qubit")
    N = 1 << n
    return np.full(N, 2.0 ** (-n / 2), dtype=np.complex128)


def basis_state(j: int, N: int) -> np.ndarray:
    if not 0 <= j < N:
        raise ValueError(f"basis index {j} out of range for dimension {N}")
    psi = np.zeros(N, dtype=np.complex128)
    psi[j] = 1.0
    return psi


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


# ----------------------------------------------------------------------------
# schedules

SCHEDULE_FAMILIES = ("qw_constant", "adiabatic_linear", "adiabatic_general_s", "hybrid_parametric")


@dataclass(frozen=True)
class Schedule:
    """Weights ``(A(t), B(t))`` on ``[0, t_f]`` mixing walk and problem terms.

    ``s_func`` (general family only) maps the normalised time ``u = t / t_f``
    to the interpolation parameter and must satisfy ``s(0) = 0``,
    ``s(1) = 1``.  ``c`` is the hybrid knob: ``c = 0`` is the linear
    adiabatic ramp, larger ``c`` lifts both weights mid-run.
    """

    family: str
    t_f: float
    c: float = 0.0
    s_func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.family not in SCHEDULE_FAMILIES:
            raise ValueError(f"unknown schedule family {self.family!r}")
        if not self.t_f > 0:
            raise ValueError("t_f must be positive")
        if (self.s_func is None) == (self.family == "adiabatic_general_s"):
            raise ValueError("s_func is required exactly for adiabatic_general_s")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError("hybrid knob c must lie in [0, 1]")
        t = np.linspace(0.0, self.t_f, 1025)
        a, b = self.weights(t)
        if a.min() < 0 or b.min() < 0 or a.max() > 1 or b.max() > 1:
            raise ValueError("schedule weights leave [0, 1]")
        if self.family != "qw_constant":
            a0, b0 = self.weights(np.array([0.0, self.t_f]))
            if not (a0[0] == 1 and a0[1] == 0 and b0[0] == 0 and b0[1] == 1):
                raise ValueError("schedule violates A(0)=B(t_f)=1, A(t_f)=B(0)=0")

    @classmethod
    def constant(cls, t_f: float) -> "Schedule":
        return cls("qw_constant", t_f)

    @classmethod
    def linear(cls, t_f: float) -> "Schedule":
        return cls("adiabatic_linear", t_f)

    @classmethod
    def general(cls, t_f: float, s_func: Callable[[np.ndarray], np.ndarray]) -> "Schedule":
        return cls("adiabatic_general_s", t_f, s_func=s_func)

    @classmethod
    def hybrid(cls, t_f: float, c: float) -> "Schedule":
        return cls("hybrid_parametric", t_f, c=c)

    def progress(self, t) -> np.ndarray:
        u = np.asarray(t, dtype=np.float64) / self.t_f
        if self.s_func is not None:
            return np.asarray(self.s_func(u), dtype=np.float64)
        return u

    def weights(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=np.float64)
        if self.family == "qw_constant":
            one = np.ones_like(t)
            return one, one.copy()
        s = self.progress(t)
        if self.family == "hybrid_parametric":
            bump = self.c * 4.0 * s * (1.0 - s)
            return np.clip(1.0 - s + bump, 0.0, 1.0), np.clip(s + bump, 0.0, 1.0)
        return 1.0 - s, s

    def to_dict(self) -> dict:
        if self.s_func is not None:
            raise ValueError("schedules with a custom s(t) are not serialisable")
        return {"family": self.family, "t_f": self.t_f, "c": self.c}


# ----------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    """Sampled evolution.

    ``values[i]`` is the state at ``times[i]`` or, when an observer was
    given, the observer's output for that state.
    """

    times: np.ndarray
    values: np.ndarray
    norms: np.ndarray
    final_state: np.ndarray
    method: str


def rk4_step_plan(bound: float, duration: float, tol: float = DRIFT_BUDGET) -> tuple[int, float]:
    """Number of RK4 steps and step length for a run of ``duration``.

    ``tol`` bounds the worst-case loss of squared norm over the whole run.
    """
    if duration <= 0:
        return 0, 0.0
    span = bound * duration
    if span == 0:
        return 1, duration
    z = min(RK4_MAX_Z, (72.0 * tol / span) ** 0.2)
    nsteps = math.ceil(span / z)
    return nsteps, duration / nsteps


def _check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    return times


def _check_state(h: Hamiltonian, psi0) -> np.ndarray:
    psi = np.array(psi0, dtype=np.complex128).ravel()
    if psi.shape != (h.dimension,):
        raise ValueError(f"state of length {psi.size} does not match dimension {h.dimension}")
    return psi


def _structured_parts(h: Hamiltonian) -> tuple[int, float, np.ndarray] | None:
    if isinstance(h, HypercubeHamiltonian):
        return h.n, float(h.gamma), np.ascontiguousarray(h.diagonal_or_zeros())
    if isinstance(h, DiagonalHamiltonian):
        return 0, 0.0, np.ascontiguousarray(h.values)
    return None


def _matrix_bandwidth(m: sp.csr_matrix) -> int:
    coo = m.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.abs(coo.row - coo.col).max())


def _row_diagonals(m: sp.spmatrix) -> tuple[np.ndarray, np.ndarray]:
    """Row-aligned band storage: ``diags[d, i] = m[i, i + offsets[d]]``."""
    coo = m.tocoo()
    off = coo.col.astype(np.int64) - coo.row.astype(np.int64)
    offsets = np.unique(off)
    dtype = np.complex128 if np.iscomplexobj(coo.data) else np.float64
    diags = np.zeros((offsets.size, m.shape[0]), dtype=dtype)
    diags[np.searchsorted(offsets, off), coo.row] = coo.data
    return offsets, diags


class _MatrixRK4:
    """RK4 for explicit matrices.

    Banded sparse matrices are integrated on a window that follows the
    support of the state: outside the window the state is exactly zero and
    the window grows whenever amplitude above ``WINDOW_TOL`` comes within
    reach of an edge during the next chunk of steps.
    """

    chunk = 64

    def __init__(self, matrix, psi: np.ndarray, banded: bool):
        self.N = psi.shape[0]
        self.kind = "dense"
        if not sp.issparse(matrix):
            self.gen = -1j * np.asarray(matrix, dtype=np.complex128)
            return
        if not banded:
            self.kind = "csr"
            self.matrix = sp.csr_matrix(matrix)
            return
        self.kind = "banded"
        self.offsets, self.diags = _row_diagonals(matrix)
        band = int(np.abs(self.offsets).max(initial=1))
        self.guard = 4 * max(band, 1) * self.chunk + 1
        support = np.flatnonzero(psi)
        first, last = (int(support[0]), int(support[-1]) + 1) if support.size else (0, 1)
        self.lo = max(0, first - 2 * self.guard)
        self.hi = min(self.N, last + 2 * self.guard)
        self._slice()

    def _slice(self) -> None:
        self.sub = np.ascontiguousarray(self.diags[:, self.lo : self.hi])

    def _maybe_grow(self, psi: np.ndarray) -> None:
        lo, hi, g = self.lo, self.hi, self.guard
        grow_lo = lo > 0 and np.abs(psi[lo : lo + g]).max() > WINDOW_TOL
        grow_hi = hi < self.N and np.abs(psi[max(lo, hi - g) : hi]).max() > WINDOW_TOL
        if not (grow_lo or grow_hi):
            return
        pad = max(2 * g, (hi - lo) // 4)
        if grow_lo:
            self.lo = max(0, lo - pad)
        if grow_hi:
            self.hi = min(self.N, hi + pad)
        self._slice()

    def run(self, psi: np.ndarray, dt: float, nsteps: int) -> None:
        if self.kind == "dense":
            self._run_dense(psi, dt, nsteps)
        elif self.kind == "csr":
            m = self.matrix
            _kernels.rk4_csr(psi, m.indptr, m.indices, m.data, dt, nsteps)
        else:
            done = 0
            while done < nsteps:
                self._maybe_grow(psi)
                todo = min(nsteps - done, self.chunk)
                _kernels.rk4_banded(psi[self.lo : self.hi], self.offsets, self.sub, dt, todo)
                done += todo

    def _run_dense(self, psi: np.ndarray, dt: float, nsteps: int) -> None:
        m = self.gen
        half, sixth = 0.5 * dt, dt / 6.0
        for _ in range(nsteps):
            k1 = m @ psi
            k2 = m @ (psi + half * k1)
            k3 = m @ (psi + half * k2)
            k4 = m @ (psi + dt * k3)
            psi += sixth * (k1 + 2.0 * (k2 + k3) + k4)


def _pick_method(h: Hamiltonian, method: str) -> str:
    if method not in ("auto", "eig", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    if method != "auto":
        return method
    if isinstance(h, DiagonalHamiltonian):
        return "eig"
    # one O(N^3) diagonalisation beats ~1e5 RK4 sweeps whenever it fits in memory
    if h.dimension <= MAX_DENSE:
        return "eig"
    return "rk4"


def _norm_guard(psi: np.ndarray, norm0: float, t: float) -> float:
    norm = float(np.linalg.norm(psi))
    if abs(norm - norm0) > NORM_TOL * max(norm0, 1.0):
        raise NormDriftError(
            f"norm drifted from {norm0:.12f} to {norm:.12f} by t={t:g}; step size too coarse"
        )
    return norm


def static_trajectory(
    h: Hamiltonian,
    psi0,
    times,
    observe: Callable[[np.ndarray], object] | None = None,
    method: str = "auto",
    rk4_tol: float = DRIFT_BUDGET,
) -> Trajectory:
    """Evolve ``psi0`` under a static ``h`` and sample it at ``times``."""
    times = _check_times(times)
    psi = _check_state(h, psi0)
    norm0 = float(np.linalg.norm(psi))
    method = _pick_method(h, method)
    record = []
    norms = np.empty(times.size)
    last = [psi]

    def keep(i: int, state: np.ndarray) -> None:
        norms[i] = _norm_guard(state, norm0, times[i])
        last[0] = state.copy()
        record.append(last[0] if observe is None else observe(state))

    if method == "eig":
        if isinstance(h, DiagonalHamiltonian):
            for i, t in enumerate(times):
                keep(i, np.exp(-1j * h.values * t) * psi)
        else:
            if not isinstance(h, MatrixHamiltonian) or h.is_sparse:
                if h.dimension > MAX_DENSE:
                    raise ValueError("eig backend needs a densifiable Hamiltonian")
                h = MatrixHamiltonian(h.to_dense())
            evals, evecs = h.eigh()
            coeffs = evecs.conj().T @ psi
            for i, t in enumerate(times):
                keep(i, psi if t == 0 else evecs @ (np.exp(-1j * evals * t) * coeffs))
    else:
        _, dt_target = rk4_step_plan(h.norm_bound(), float(times[-1]), rk4_tol)
        parts = _structured_parts(h)
        if parts is None:
            banded = h.is_sparse and 64 * max(1, _matrix_bandwidth(h.matrix)) < h.dimension
            stepper = _MatrixRK4(h.matrix, psi, banded)
        else:
            n, gamma, diag = parts
            cx, c0, c1 = np.array([gamma]), np.array([1.0]), np.array([0.0])
        t_now = 0.0
        for i, t in enumerate(times):
            seg = float(t) - t_now
            if seg > 0:
                nsteps = math.ceil(seg / dt_target - 1e-9)
                dt = seg / nsteps
                if parts is None:
                    stepper.run(psi, dt, nsteps)
                else:
                    _kernels.rk4_structured(psi, n, dt, nsteps, cx, c0, diag, c1, diag)
                t_now = float(t)
            keep(i, psi)
    values = np.stack(record) if observe is None else np.asarray(record)
    return Trajectory(times, values, norms, last[0], method)


def evolve_static(
    h: Hamiltonian, psi0, t: float, method: str = "auto", rk4_tol: float = DRIFT_BUDGET
) -> np.ndarray:
    """``exp(-i H t) psi0``."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    return static_trajectory(h, psi0, [t], method=method, rk4_tol=rk4_tol).final_state


def _scheduled_rk4_generic(h_walk, h_problem, sched, psi, t0, dt, nsteps):
    gen_w = _generator(h_walk)
    gen_p = _generator(h_problem)
    half = 0.5 * dt
    for s in range(nsteps):
        t = t0 + s * dt
        (a0, a1, a2), (b0, b1, b2) = sched.weights(np.array([t, t + half, t + dt]))

        def f(x, a, b):
            return a * gen_w(x) + b * gen_p(x)

        k1 = f(psi, a0, b0)
        k2 = f(psi + half * k1, a1, b1)
        k3 = f(psi + half * k2, a1, b1)
        k4 = f(psi + dt * k3, a2, b2)
        psi += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _generator(h: Hamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    """Callable returning ``-i H x``."""
    if isinstance(h, MatrixHamiltonian):
        m = h.matrix
        m = sp.csr_matrix(-1j * m.astype(np.complex128)) if sp.issparse(m) else -1j * np.asarray(m, dtype=np.complex128)
        return lambda x: m @ x
    return lambda x: -1j * h.apply(x)


def evolve_scheduled(
    h_walk: Hamiltonian,
    h_problem: Hamiltonian,
    sched: Schedule,
    psi0,
    samples: int = DEFAULT_SAMPLES,
    observe: Callable[[np.ndarray], object] | None = None,
    rk4_tol: float = DRIFT_BUDGET,
) -> Trajectory:
    """Integrate ``d psi/dt = -i [A(t) h_walk + B(t) h_problem] psi`` over the schedule.

    The trajectory is sampled at ``samples`` uniform times from 0 to ``t_f``
    inclusive; ``final_state`` is the state at ``t_f``.
    """
    if h_walk.dimension != h_problem.dimension:
        raise ValueError("walk and problem Hamiltonians differ in dimension")
    if samples < 2:
        raise ValueError("need at least two samples")
    psi = _check_state(h_walk, psi0)
    norm0 = float(np.linalg.norm(psi))
    times = np.linspace(0.0, sched.t_f, samples)
    probe = np.linspace(0.0, sched.t_f, 4097)
    a_all, b_all = sched.weights(probe)
    bound = float(a_all.max()) * h_walk.norm_bound() + float(b_all.max()) * h_problem.norm_bound()
    _, dt_target = rk4_step_plan(bound, sched.t_f, rk4_tol)

    pw, pp = _structured_parts(h_walk), _structured_parts(h_problem)
    fused = pw is not None and pp is not None and (pw[0] == pp[0] or pw[1] == 0 or pp[1] == 0)
    if fused:
        n = max(pw[0], pp[0])
        dw, dp = pw[2], pp[2]

    record, norms = [], np.empty(samples)
    for i, t in enumerate(times):
        if i:
            t0 = times[i - 1]
            seg = t - t0
            nsteps = math.ceil(seg / dt_target - 1e-9)
            dt = seg / nsteps
            if fused:
                grid = t0 + 0.5 * dt * np.arange(2 * nsteps + 1)
                a, b = sched.weights(grid)
                cx = np.ascontiguousarray(a * pw[1] + b * pp[1])
                _kernels.rk4_structured(
                    psi, n, dt, nsteps, cx, np.ascontiguousarray(a), dw, np.ascontiguousarray(b), dp
                )
            else:
                _scheduled_rk4_generic(h_walk, h_problem, sched, psi, t0, dt, nsteps)
        norms[i] = _norm_guard(psi, norm0, t)
        record.append(psi.copy() if observe is None else observe(psi))
    values = np.stack(record) if observe is None else np.asarray(record)
    return Trajectory(times, values, norms, psi.copy(), "rk4")


# ----------------------------------------------------------------------------
# spectra


class GapResult(NamedTuple):
    s_star: float
    gap_min: float
    degenerate: bool


def _dense(h: Hamiltonian) -> np.ndarray:
    if h.dimension > MAX_DENSE:
        raise ValueError(f"dimension {h.dimension} exceeds the dense limit {MAX_DENSE}")
    return h.to_dense()


def spectrum(h: Hamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in ascending order and matching eigenvector columns."""
    if isinstance(h, MatrixHamiltonian) and h.dimension <= MAX_DENSE:
        return h.eigh()
    return np.linalg.eigh(_dense(h))


def _lowest_two(m: np.ndarray) -> np.ndarray:
    if m.shape[0] < 2:
        raise ValueError("a gap needs at least two levels")
    return scipy.linalg.eigh(m, eigvals_only=True, subset_by_index=[0, 1], check_finite=False)


def gap_curve(h_walk: Hamiltonian, h_problem: Hamiltonian, s_values) -> tuple[np.ndarray, np.ndarray]:
    """Two lowest levels of ``(1 - s) h_walk + s h_problem`` along ``s_values``."""
    hw, hp = _dense(h_walk), _dense(h_problem)
    if hw.shape != hp.shape:
        raise ValueError("walk and problem Hamiltonians differ in dimension")
    levels = np.array([_lowest_two((1.0 - s) * hw + s * hp) for s in np.asarray(s_values)])
    return levels[:, 0], levels[:, 1]


def golden_section_min(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-4):
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rtol * max(abs(a) + abs(b), 1e-12) / 2:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def min_gap(h_walk: Hamiltonian, h_problem: Hamiltonian, resolution: int = 64) -> GapResult:
    """Smallest ``E1 - E0`` along ``(1 - s) h_walk + s h_problem``, ``s`` in [0, 1].

    Uniform scan followed by one golden-section refinement on the bracket
    around the coarse minimum.  Degenerate ground states (gap below 1e-12)
    are flagged rather than raised.
    """
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    hw, hp = _dense(h_walk), _dense(h_problem)

    def gap(s: float) -> float:
        e = _lowest_two((1.0 - s) * hw + s * hp)
        return float(e[1] - e[0])

    s_grid = np.linspace(0.0, 1.0, resolution)
    gaps = np.array([gap(s) for s in s_grid])
    i = int(np.argmin(gaps))
    s_best, g_best = float(s_grid[i]), float(gaps[i])
    lo, hi = s_grid[max(i - 1, 0)], s_grid[min(i + 1, resolution - 1)]
    s_ref, g_ref = golden_section_min(gap, float(lo), float(hi))
    if g_ref < g_best:
        s_best, g_best = s_ref, g_ref
    return GapResult(s_best, g_best, g_best < 1e-12)


# ----------------------------------------------------------------------------
# line-walk diagnostics


def position_spread(traj: Trajectory, graph: Graph) -> np.ndarray:
    """``(t, sigma)`` rows: standard deviation of the vertex position."""
    if graph.kind != "line":
        raise ValueError("position spread is defined for line graphs only")
    values = np.asarray(traj.values)
    probs = np.abs(values) ** 2 if np.iscomplexobj(values) else values
    if probs.ndim != 2 or probs.shape[1] != graph.num_vertices:
        raise ValueError("trajectory must hold full states or probability rows")
    x = np.arange(graph.num_vertices, dtype=np.float64)
    total = probs.sum(axis=1)
    mean = probs @ x / total
    var = (probs * (x[None, :] - mean[:, None]) ** 2).sum(axis=1) / total
    return np.column_stack([traj.times, np.sqrt(np.maximum(var, 0.0))])
