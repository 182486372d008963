"""Graph families and their matrix encodings.

The Laplacian follows the sign convention ``L = A - D``: zero row sums and a
negative diagonal, so ``L`` is negative semidefinite.  Walk Hamiltonians
absorb the sign through ``H = -gamma * L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GRAPH_KINDS",
    "DENSE_LIMIT",
    "Graph",
    "make_graph",
    "line_graph",
    "cycle_graph",
    "complete_graph",
    "hypercube_graph",
    "glued_trees_graph",
    "adjacency",
    "degree_vector",
    "laplacian",
    "to_edge_list",
    "from_edge_list",
]

GRAPH_KINDS = ("line", "cycle", "complete", "hypercube", "glued_trees", "custom")

# Matrices above this vertex count are returned as scipy CSR.
DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0 .. num_vertices - 1``.

    ``edges`` is an ``(E, 2)`` integer array of pairs ``j < k`` in ascending
    lexicographic order.  ``info`` carries family-specific metadata, e.g. the
    entrance/exit roots and column labels of a glued-trees graph.
    """

    num_vertices: int
    edges: np.ndarray
    kind: str = "custom"
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            lo = edges.min(axis=1)
            hi = edges.max(axis=1)
            if lo.min() < 0 or hi.max() >= self.num_vertices:
                raise ValueError("edge endpoint out of range")
            if np.any(lo == hi):
                raise ValueError("self-loops are not allowed")
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
                raise ValueError("duplicate edge")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}

    def bandwidth(self) -> int:
        """Largest ``|j - k|`` over edges (0 for an edgeless graph)."""
        if not self.num_edges:
            return 0
        return int((self.edges[:, 1] - self.edges[:, 0]).max())


def _pairs(rows: list[tuple[int, int]] | np.ndarray) -> np.ndarray:
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)


def line_graph(num_vertices: int) -> Graph:
    j = np.arange(num_vertices - 1)
    return Graph(num_vertices, np.stack([j, j + 1], axis=1), "line")


def cycle_graph(num_vertices: int) -> Graph:
    if num_vertices < 3:
        raise ValueError("a simple cycle needs at least 3 vertices")
    j = np.arange(num_vertices)
    return Graph(num_vertices, np.stack([j, (j + 1) % num_vertices], axis=1), "cycle")


def complete_graph(num_vertices: int) -> Graph:
    j, k = np.triu_indices(num_vertices, k=1)
    return Graph(num_vertices, np.stack([j, k], axis=1), "complete")


def hypercube_graph(n: int) -> Graph:
    """Vertices are n-bit labels; edges join labels at Hamming distance one."""
    N = 1 << n
    j = np.repeat(np.arange(N, dtype=np.int64), n)
    k = j ^ np.tile(1 << np.arange(n, dtype=np.int64), N)
    keep = j < k
    return Graph(N, np.stack([j[keep], k[keep]], axis=1), "hypercube", {"n": n})


def glued_trees_graph(depth: int, seed: int) -> Graph:
    """Two binary trees of the given depth glued by a random alternating cycle.

    The left tree occupies heap indices ``0 .. 2^(d+1) - 2`` with the entrance
    root at 0; the right tree is the same layout shifted by ``2^(d+1) - 1``
    with the exit root at the shift.  Every leaf receives two glue edges, so
    leaves end up with degree 3.
    """
    if depth < 1:
        raise ValueError("glued trees need depth >= 1")
    rng = np.random.default_rng(seed)
    per_tree = (1 << (depth + 1)) - 1
    child = np.arange(1, per_tree)
    tree = np.stack([(child - 1) // 2, child], axis=1)
    tree_edges = np.concatenate([tree, tree + per_tree])

    leaves = np.arange((1 << depth) - 1, per_tree)
    left = rng.permutation(leaves)
    right = rng.permutation(leaves) + per_tree
    glue = np.concatenate(
        [np.stack([left, right], axis=1), np.stack([np.roll(left, -1), right], axis=1)]
    )

    heap_depth = np.floor(np.log2(np.arange(per_tree) + 1)).astype(np.int64)
    columns = np.concatenate([heap_depth, 2 * depth + 1 - heap_depth])
    info = {
        "depth": depth,
        "seed": seed,
        "entrance": 0,
        "exit": per_tree,
        "columns": columns,
        "glue_edges": np.sort(glue, axis=1),
    }
    return Graph(2 * per_tree, np.concatenate([tree_edges, glue]), "glued_trees", info)


def make_graph(kind: str, size_param: int, seed: int | None = None) -> Graph:
    """Build a graph family member.

    ``size_param`` is the vertex count for line/cycle/complete, the dimension
    for hypercube and the tree depth for glued_trees.
    """
    if kind not in GRAPH_KINDS or kind == "custom":
        raise ValueError(f"unknown graph kind {kind!r}")
    if size_param < 1:
        raise ValueError("size_param must be >= 1")
    if kind == "line":
        return line_graph(size_param)
    if kind == "cycle":
        return cycle_graph(size_param)
    if kind == "complete":
        return complete_graph(size_param)
    if kind == "hypercube":
        return hypercube_graph(size_param)
    if seed is None:
        raise ValueError("glued_trees requires a seed")
    return glued_trees_graph(size_param, seed)


def _sparse_adjacency(g: Graph) -> sp.csr_matrix:
    j, k = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([j, k])
    cols = np.concatenate([k, j])
    data = np.ones(rows.size)
    return sp.csr_matrix((data, (rows, cols)), shape=(g.num_vertices,) * 2)


def adjacency(g: Graph) -> np.ndarray | sp.csr_matrix:
    a = _sparse_adjacency(g)
    return a.toarray() if g.num_vertices <= DENSE_LIMIT else a


def degree_vector(g: Graph) -> np.ndarray:
    deg = np.zeros(g.num_vertices, dtype=np.int64)
    np.add.at(deg, g.edges.ravel(), 1)
    return deg


def laplacian(g: Graph) -> np.ndarray | sp.csr_matrix:
    """``L = A - D``; dense up to ``DENSE_LIMIT`` vertices, CSR above."""
    lap = _sparse_adjacency(g) - sp.diags(degree_vector(g).astype(float))
    lap = sp.csr_matrix(lap)
    return lap.toarray() if g.num_vertices <= DENSE_LIMIT else lap


def to_edge_list(g: Graph) -> str:
    lines = [f"N {g.num_vertices}"]
    lines.extend(f"{a} {b}" for a, b in g.edges)
    return "\n".join(lines) + "\n"


def from_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2 or rows[0][0] != "N":
        raise ValueError("edge list must start with 'N <num_vertices>'")
    num_vertices = int(rows[0][1])
    pairs = []
    for row in rows[1:]:
        if len(row) != 2:
            raise ValueError(f"malformed edge line: {' '.join(row)!r}")
        pairs.append((int(row[0]), int(row[1])))
    return Graph(num_vertices, _pairs(pairs))
