"""Hamiltonians for walks, search and diagonal optimisation problems.

Three representations share one contract (``apply``, ``norm_bound``,
``to_dense``):

``MatrixHamiltonian``
    explicit Hermitian matrix, numpy array or scipy sparse.
``DiagonalHamiltonian``
    real diagonal in the computational basis.
``HypercubeHamiltonian``
    ``gamma * (n - sum_k X_k)`` plus an optional diagonal addend, applied in
    ``O(n 2^n)`` without materialising a matrix.

Basis index ``i`` encodes qubit ``k`` as bit ``k`` of ``i``; ``Z_k`` has
eigenvalue ``+1`` on bit value 1 and ``-1`` on bit value 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .graphs import Graph, laplacian

__all__ = [
    "Hamiltonian",
    "MatrixHamiltonian",
    "DiagonalHamiltonian",
    "HypercubeHamiltonian",
    "IsingInstance",
    "walk_hamiltonian",
    "hypercube_qubit_hamiltonian",
    "marked_hamiltonian",
    "marked_pauli_form",
    "ising_hamiltonian",
    "sk_instance",
    "zero_hamiltonian",
    "add",
    "apply",
    "spin_values",
    "diagonal_to_json",
    "diagonal_from_json",
]

HERMITIAN_TOL = 1e-12
MAX_STRUCTURED_QUBITS = 30


class Hamiltonian:
    """Common interface; concrete classes are frozen dataclasses."""

    representation: str
    dimension: int

    def apply(self, psi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def norm_bound(self) -> float:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        raise NotImplementedError

    def _check(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.shape != (self.dimension,):
            raise ValueError(
                f"state of shape {psi.shape} does not match dimension {self.dimension}"
            )
        return psi

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        return add(self, other)


@dataclass(frozen=True, eq=False)
class MatrixHamiltonian(Hamiltonian):
    matrix: np.ndarray | sp.spmatrix
    representation: str = field(default="dense", init=False)

    def __post_init__(self) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hamiltonian matrix must be square")
        if sp.issparse(m):
            m = sp.csr_matrix(m)
            dev = abs(m - m.conj().T)
            worst = dev.max() if dev.nnz else 0.0
        else:
            m = np.asarray(m)
            worst = np.abs(m - m.conj().T).max() if m.size else 0.0
        if worst > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (deviation {worst:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def apply(self, psi):
        return self.matrix @ self._check(psi)

    def norm_bound(self) -> float:
        row_sums = abs(self.matrix).sum(axis=1)
        return float(np.max(row_sums)) if self.dimension else 0.0

    def to_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return np.array(self.matrix)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached dense eigendecomposition."""
        cached = self.__dict__.get("_eigh")
        if cached is None:
            dense = self.to_dense()
            if np.iscomplexobj(dense) and not dense.imag.any():
                dense = dense.real  # real symmetric solver is several times faster
            cached = np.linalg.eigh(dense)
            object.__setattr__(self, "_eigh", cached)
        return cached


@dataclass(frozen=True, eq=False)
class DiagonalHamiltonian(Hamiltonian):
    values: np.ndarray
    representation: str = field(default="diagonal", init=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if np.iscomplexobj(v):
            if np.abs(v.imag).max(initial=0.0) > HERMITIAN_TOL:
                raise ValueError("diagonal Hamiltonian entries must be real")
            v = v.real
        v = np.array(v, dtype=np.float64).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    def apply(self, psi):
        return self.values * self._check(psi)

    def norm_bound(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.values).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class HypercubeHamiltonian(Hamiltonian):
    """``gamma * (n * 1 - sum_k X_k) + diag(diagonal)``."""

    n: int
    gamma: float
    diagonal: np.ndarray | None = None
    representation: str = field(default="qubit_structured", init=False)

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_STRUCTURED_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_STRUCTURED_QUBITS}")
        if self.diagonal is not None:
            d = np.array(self.diagonal, dtype=np.float64).ravel()
            if d.shape != (1 << self.n,):
                raise ValueError("diagonal addend has the wrong length")
            d.setflags(write=False)
            object.__setattr__(self, "diagonal", d)

    @property
    def dimension(self) -> int:
        return 1 << self.n

    def diagonal_or_zeros(self) -> np.ndarray:
        if self.diagonal is None:
            return np.zeros(self.dimension)
        return self.diagonal

    def apply(self, psi):
        psi = np.ascontiguousarray(self._check(psi))
        out = np.empty_like(psi)
        _kernels.hypercube_apply(out, psi, self.n, float(self.gamma), self.diagonal_or_zeros())
        return out

    def norm_bound(self) -> float:
        extra = 0.0 if self.diagonal is None else float(np.abs(self.diagonal).max())
        return 2.0 * abs(self.gamma) * self.n + extra

    def to_dense(self) -> np.ndarray:
        N = self.dimension
        h = np.zeros((N, N), dtype=np.complex128)
        idx = np.arange(N)
        h[idx, idx] = self.gamma * self.n + self.diagonal_or_zeros()
        for k in range(self.n):
            h[idx, idx ^ (1 << k)] -= self.gamma
        return h


def apply(h: Hamiltonian, psi: np.ndarray) -> np.ndarray:
    return h.apply(psi)


def zero_hamiltonian(N: int) -> DiagonalHamiltonian:
    return DiagonalHamiltonian(np.zeros(N))


def walk_hamiltonian(g: Graph, gamma: float) -> MatrixHamiltonian:
    """``<j|H|k> = -gamma * L_jk`` with ``L = A - D``."""
    if gamma <= 0:
        raise ValueError("transition rate gamma must be positive")
    return MatrixHamiltonian(-gamma * laplacian(g))


def hypercube_qubit_hamiltonian(n: int, gamma: float) -> HypercubeHamiltonian:
    if gamma <= 0:
        raise ValueError("transition rate gamma must be positive")
    return HypercubeHamiltonian(n, float(gamma))


def marked_hamiltonian(N: int, m: int) -> DiagonalHamiltonian:
    """``1 - |m><m|``: the marked state sits one unit below the rest."""
    if not 0 <= m < N:
        raise ValueError(f"marked index {m} out of range for dimension {N}")
    d = np.ones(N)
    d[m] = 0.0
    return DiagonalHamiltonian(d)


def spin_values(n: int) -> np.ndarray:
    """``(2^n, n)`` array of Z eigenvalues: ``+1`` where bit k is set."""
    idx = np.arange(1 << n)[:, None]
    return 2 * ((idx >> np.arange(n)) & 1) - 1


def marked_pauli_form(n: int, m: int) -> DiagonalHamiltonian:
    """``1 - 2^-n prod_k (1 + q_k Z_k)`` with ``q_k = +1`` iff bit k of m is 1."""
    if not 0 <= m < (1 << n):
        raise ValueError(f"marked index {m} out of range for {n} qubits")
    q = 2 * ((m >> np.arange(n)) & 1) - 1
    prod = np.prod(1.0 + q[None, :] * spin_values(n), axis=1)
    return DiagonalHamiltonian(1.0 - prod / 2.0**n)


def _coupling_items(couplings, n: int):
    items = couplings.items() if isinstance(couplings, Mapping) else couplings
    for entry in items:
        if isinstance(couplings, Mapping):
            (j, k), J = entry
        else:
            j, k, J = entry
        j, k = int(j), int(k)
        if j == k or not (0 <= j < n and 0 <= k < n):
            raise ValueError(f"invalid coupling pair ({j}, {k}) for {n} spins")
        yield min(j, k), max(j, k), float(J)


def ising_hamiltonian(couplings, fields: Sequence[float]) -> DiagonalHamiltonian:
    """Classical Ising energies ``sum J_jk s_j s_k + sum h_j s_j`` on the diagonal.

    ``couplings`` is either a mapping ``{(j, k): J}`` or an iterable of
    ``(j, k, J)`` triples; ``s_j = +1`` when bit j of the index is set.
    """
    h = np.asarray(fields, dtype=np.float64)
    n = h.shape[0]
    if n < 1:
        raise ValueError("at least one spin is required")
    s = spin_values(n)
    energy = s @ h
    for j, k, J in _coupling_items(couplings, n):
        energy = energy + J * s[:, j] * s[:, k]
    return DiagonalHamiltonian(energy)


@dataclass(frozen=True)
class IsingInstance:
    n: int
    couplings: tuple[tuple[int, int, float], ...]
    fields: tuple[float, ...]

    def hamiltonian(self) -> DiagonalHamiltonian:
        return ising_hamiltonian(self.couplings, self.fields)

    def to_json(self) -> str:
        record = {
            "n": self.n,
            "couplings": [[j, k, J] for j, k, J in self.couplings],
            "fields": list(self.fields),
        }
        return json.dumps(record, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IsingInstance":
        record = json.loads(text)
        extra = set(record) - {"n", "couplings", "fields"}
        if extra:
            raise ValueError(f"unknown keys in Ising record: {sorted(extra)}")
        n = int(record["n"])
        fields = tuple(float(h) for h in record["fields"])
        if len(fields) != n:
            raise ValueError("fields length does not match n")
        couplings = tuple(_coupling_items([tuple(c) for c in record["couplings"]], n))
        return cls(n, couplings, fields)


def sk_instance(n: int, seed: int) -> IsingInstance:
    """Sherrington-Kirkpatrick couplings ``J_jk ~ N(0, 1) / sqrt(n)``, no fields."""
    rng = np.random.default_rng(seed)
    j, k = np.triu_indices(n, k=1)
    J = rng.standard_normal(j.size) / np.sqrt(n)
    couplings = tuple((int(a), int(b), float(c)) for a, b, c in zip(j, k, J))
    return IsingInstance(n, couplings, (0.0,) * n)


def diagonal_to_json(h: DiagonalHamiltonian) -> str:
    return json.dumps({"dimension": h.dimension, "diagonal": h.values.tolist()}, indent=2)


def diagonal_from_json(text: str) -> DiagonalHamiltonian:
    record = json.loads(text)
    values = np.asarray(record["diagonal"], dtype=np.float64)
    if values.shape != (int(record["dimension"]),):
        raise ValueError("diagonal length does not match dimension")
    return DiagonalHamiltonian(values)


def add(h1: Hamiltonian, h2: Hamiltonian) -> Hamiltonian:
    """Operator sum.

    diagonal + diagonal stays diagonal, structured + diagonal stays
    structured (the diagonal becomes the addend), anything with a matrix
    becomes a matrix.
    """
    if h1.dimension != h2.dimension:
        raise ValueError(f"dimension mismatch: {h1.dimension} vs {h2.dimension}")
    if isinstance(h1, DiagonalHamiltonian) and isinstance(h2, DiagonalHamiltonian):
        return DiagonalHamiltonian(h1.values + h2.values)
    if isinstance(h2, HypercubeHamiltonian) and not isinstance(h1, HypercubeHamiltonian):
        h1, h2 = h2, h1
    if isinstance(h1, HypercubeHamiltonian):
        if isinstance(h2, DiagonalHamiltonian):
            return HypercubeHamiltonian(h1.n, h1.gamma, h1.diagonal_or_zeros() + h2.values)
        if isinstance(h2, HypercubeHamiltonian):
            return HypercubeHamiltonian(
                h1.n, h1.gamma + h2.gamma, h1.diagonal_or_zeros() + h2.diagonal_or_zeros()
            )
    a, b = _as_matrix(h1), _as_matrix(h2)
    if sp.issparse(a) and sp.issparse(b):
        return MatrixHamiltonian(sp.csr_matrix(a + b))
    return MatrixHamiltonian(_densify(a) + _densify(b))


def _densify(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def _as_matrix(h: Hamiltonian):
    if isinstance(h, MatrixHamiltonian):
        return h.matrix
    if isinstance(h, DiagonalHamiltonian):
        return sp.diags(h.values, format="csr")
    return sp.csr_matrix(h.to_dense())
