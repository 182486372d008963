from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from ctwalk.graphs import (
    DENSE_LIMIT,
    Graph,
    adjacency,
    degree_vector,
    from_edge_list,
    glued_trees_graph,
    hypercube_graph,
    laplacian,
    make_graph,
    to_edge_list,
)

KINDS = [("line", 7), ("cycle", 7), ("complete", 6), ("hypercube", 4)]


def brute_hypercube_edges(n):
    # independent oracle: pairs of labels whose XOR is a power of two
    N = 1 << n
    return {(j, k) for j in range(N) for k in range(j + 1, N) if bin(j ^ k).count("1") == 1}


@pytest.mark.parametrize("kind,size", KINDS)
def test_laplacian_conventions(kind, size):
    g = make_graph(kind, size)
    lap = laplacian(g)
    np.testing.assert_allclose(lap, lap.T)
    np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_array_equal(np.diag(lap), -degree_vector(g))
    assert np.linalg.eigvalsh(lap).max() <= 1e-10


@pytest.mark.parametrize(
    "kind,size,edges", [("line", 10, 9), ("cycle", 10, 10), ("complete", 10, 45), ("hypercube", 5, 80)]
)
def test_edge_counts(kind, size, edges):
    assert make_graph(kind, size).num_edges == edges


@pytest.mark.parametrize("n", range(1, 8))
def test_hypercube_matches_hamming_oracle(n):
    g = hypercube_graph(n)
    assert g.edge_set() == brute_hypercube_edges(n)
    assert np.all(degree_vector(g) == n)


def test_line_bandwidth_and_endpoints():
    g = make_graph("line", 5)
    assert g.bandwidth() == 1
    np.testing.assert_array_equal(degree_vector(g), [1, 2, 2, 2, 1])


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_glued_trees_structure(depth):
    g = glued_trees_graph(depth, seed=5)
    per_tree = 2 ** (depth + 1) - 1
    assert g.num_vertices == 2 * per_tree
    assert g.num_edges == 2 * (per_tree - 1) + 2 ** (depth + 1)
    deg = degree_vector(g)
    assert deg[g.info["entrance"]] == 2 and deg[g.info["exit"]] == 2
    others = np.delete(deg, [g.info["entrance"], g.info["exit"]])
    assert np.all(others == 3)
    cols = g.info["columns"]
    assert cols[g.info["entrance"]] == 0 and cols[g.info["exit"]] == 2 * depth + 1
    # every edge joins adjacent columns
    a, b = g.edges.T
    assert np.all(np.abs(cols[a] - cols[b]) == 1)
    # the glue is a single alternating cycle through all leaves
    glue = g.info["glue_edges"]
    gg = Graph(g.num_vertices, glue)
    leaves = np.flatnonzero(degree_vector(gg))
    comp = sp.csgraph.connected_components(adjacency(gg)[np.ix_(leaves, leaves)])[0]
    assert comp == 1


def test_glued_trees_seeded():
    a, b = glued_trees_graph(3, 1), glued_trees_graph(3, 1)
    np.testing.assert_array_equal(a.edges, b.edges)
    assert glued_trees_graph(3, 2).edge_set() != a.edge_set()


def test_make_graph_errors():
    with pytest.raises(ValueError):
        make_graph("star", 4)
    with pytest.raises(ValueError):
        make_graph("line", 0)
    with pytest.raises(ValueError):
        make_graph("glued_trees", 2)
    with pytest.raises(ValueError):
        make_graph("cycle", 2)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(3, [[0, 0]])
    with pytest.raises(ValueError):
        Graph(3, [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        Graph(3, [[0, 3]])


def test_sparse_above_limit():
    big = make_graph("line", DENSE_LIMIT + 1)
    assert sp.issparse(laplacian(big)) and sp.issparse(adjacency(big))
    assert isinstance(laplacian(make_graph("line", DENSE_LIMIT)), np.ndarray)
    np.testing.assert_allclose(np.asarray(laplacian(big).sum(axis=1)).ravel(), 0.0)


@st.composite
def random_graphs(draw):
    N = draw(st.integers(1, 12))
    pairs = [(j, k) for j in range(N) for k in range(j + 1, N)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph(N, np.array(chosen, dtype=np.int64).reshape(-1, 2))


@given(random_graphs())
def test_edge_list_round_trip(g):
    back = from_edge_list(to_edge_list(g))
    assert back.num_vertices == g.num_vertices
    np.testing.assert_array_equal(back.edges, g.edges)


@given(random_graphs())
def test_laplacian_properties(g):
    lap = laplacian(g)
    np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    assert np.linalg.eigvalsh(lap).max() <= 1e-9
    # multiplicity of the zero eigenvalue counts connected components
    ncomp = sp.csgraph.connected_components(sp.csr_matrix(adjacency(g)))[0]
    assert np.sum(np.abs(np.linalg.eigvalsh(lap)) < 1e-9) == ncomp


def test_edge_list_errors():
    with pytest.raises(ValueError):
        from_edge_list("0 1\n")
    with pytest.raises(ValueError):
        from_edge_list("N 3\n0 1 2\n")
