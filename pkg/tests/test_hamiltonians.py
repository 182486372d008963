from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ctwalk.graphs import hypercube_graph, laplacian, make_graph
from ctwalk.hamiltonians import (
    DiagonalHamiltonian,
    HypercubeHamiltonian,
    IsingInstance,
    MatrixHamiltonian,
    add,
    diagonal_from_json,
    diagonal_to_json,
    hypercube_qubit_hamiltonian,
    ising_hamiltonian,
    marked_hamiltonian,
    marked_pauli_form,
    sk_instance,
    walk_hamiltonian,
    zero_hamiltonian,
)

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]])
# bit value 1 carries Z = +1
Z = np.diag([-1.0, 1.0])


def on_qubit(op, k, n):
    # qubit k is bit k of the index, so it is the (n-1-k)-th Kronecker factor
    return reduce(np.kron, [op if q == k else I2 for q in reversed(range(n))])


def kron_hypercube(n, gamma):
    return gamma * (n * np.eye(2**n) - sum(on_qubit(X, k, n) for k in range(n)))


def kron_marked(n, m):
    proj = reduce(
        np.kron, [(I2 + (1 if (m >> k) & 1 else -1) * Z) / 2 for k in reversed(range(n))]
    )
    return np.eye(2**n) - proj


def random_state(rng, N):
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("n", range(1, 7))
def test_marked_forms_agree(n):
    for m in range(2**n):
        direct = marked_hamiltonian(2**n, m).values
        pauli = marked_pauli_form(n, m).values
        np.testing.assert_allclose(pauli, direct, rtol=0, atol=1e-12)
        np.testing.assert_allclose(np.diag(kron_marked(n, m)), direct, rtol=0, atol=1e-12)


@pytest.mark.parametrize("n", range(1, 6))
def test_structured_matches_kron_and_laplacian(n):
    gamma = 0.37
    h = hypercube_qubit_hamiltonian(n, gamma)
    np.testing.assert_allclose(h.to_dense(), kron_hypercube(n, gamma), rtol=0, atol=1e-12)
    np.testing.assert_allclose(h.to_dense(), -gamma * laplacian(hypercube_graph(n)), rtol=0, atol=1e-12)
    rng = np.random.default_rng(n)
    psi = random_state(rng, 2**n)
    np.testing.assert_allclose(h.apply(psi), kron_hypercube(n, gamma) @ psi, rtol=0, atol=1e-12)


@pytest.mark.parametrize("n", [1, 4, 8, 12])
def test_equal_superposition_is_zero_mode(n):
    psi = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    assert np.linalg.norm(hypercube_qubit_hamiltonian(n, 1.3).apply(psi)) <= 1e-12


@given(st.integers(1, 7), st.floats(0.01, 5.0), st.integers(0, 2**31))
def test_structured_apply_hermitian_and_psd(n, gamma, seed):
    rng = np.random.default_rng(seed)
    h = hypercube_qubit_hamiltonian(n, gamma)
    a, b = random_state(rng, 2**n), random_state(rng, 2**n)
    np.testing.assert_allclose(np.vdot(a, h.apply(b)), np.vdot(h.apply(a), b), atol=1e-12)
    assert np.vdot(a, h.apply(a)).real >= -1e-12
    assert np.linalg.norm(h.apply(a)) <= h.norm_bound() + 1e-12


@given(st.integers(2, 6), st.integers(0, 2**31))
def test_ising_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    couplings = {(j, k): rng.standard_normal() for j, k in itertools.combinations(range(n), 2)}
    fields = rng.standard_normal(n)
    energies = ising_hamiltonian(couplings, fields).values
    for idx in range(2**n):
        s = [1 if (idx >> k) & 1 else -1 for k in range(n)]
        e = sum(J * s[j] * s[k] for (j, k), J in couplings.items()) + sum(h * s[k] for k, h in enumerate(fields))
        assert abs(energies[idx] - e) < 1e-12
    # the same energies from Z-string operators
    dense = sum(J * on_qubit(Z, j, n) @ on_qubit(Z, k, n) for (j, k), J in couplings.items())
    dense = dense + sum(h * on_qubit(Z, k, n) for k, h in enumerate(fields))
    np.testing.assert_allclose(np.diag(dense), energies, atol=1e-12)


def test_ising_triples_equal_mapping():
    a = ising_hamiltonian({(0, 1): 0.5, (1, 2): -1.0}, [0.1, 0.0, 0.2])
    b = ising_hamiltonian([(1, 0, 0.5), (2, 1, -1.0)], [0.1, 0.0, 0.2])
    np.testing.assert_array_equal(a.values, b.values)
    with pytest.raises(ValueError):
        ising_hamiltonian({(0, 0): 1.0}, [0.0, 0.0])


def test_ising_json_round_trip():
    inst = sk_instance(5, 1)
    back = IsingInstance.from_json(inst.to_json())
    assert back == inst
    np.testing.assert_array_equal(back.hamiltonian().values, inst.hamiltonian().values)
    with pytest.raises(ValueError):
        IsingInstance.from_json('{"n": 1, "couplings": [], "fields": [0], "extra": 1}')


def test_sk_instance_seeded():
    a, b = sk_instance(6, 3), sk_instance(6, 3)
    assert a == b and a != sk_instance(6, 4)
    assert len(a.couplings) == 15
    # spin-flip symmetry of an SK instance without fields
    e = a.hamiltonian().values
    np.testing.assert_allclose(e, e[::-1], atol=1e-12)


@given(arrays(np.float64, st.integers(1, 16), elements=st.floats(-10, 10)))
def test_diagonal_json_round_trip(v):
    h = DiagonalHamiltonian(v)
    np.testing.assert_array_equal(diagonal_from_json(diagonal_to_json(h)).values, h.values)


def test_add_promotion_rules():
    n = 3
    hw = hypercube_qubit_hamiltonian(n, 0.5)
    hm = marked_hamiltonian(8, 5)
    s = add(hw, hm)
    assert isinstance(s, HypercubeHamiltonian)
    np.testing.assert_allclose(s.to_dense(), hw.to_dense() + hm.to_dense(), atol=1e-12)
    assert isinstance(add(hm, hw), HypercubeHamiltonian)
    assert isinstance(add(hm, zero_hamiltonian(8)), DiagonalHamiltonian)
    hh = add(hw, hypercube_qubit_hamiltonian(n, 0.25))
    np.testing.assert_allclose(hh.to_dense(), kron_hypercube(n, 0.75), atol=1e-12)

    walk = walk_hamiltonian(make_graph("cycle", 8), 1.0)
    mixed = add(walk, hm)
    assert isinstance(mixed, MatrixHamiltonian) and not mixed.is_sparse
    np.testing.assert_allclose(mixed.to_dense(), walk.to_dense() + hm.to_dense(), atol=1e-12)
    sparse_walk = MatrixHamiltonian(sp.csr_matrix(walk.matrix))
    assert add(sparse_walk, hm).is_sparse
    with pytest.raises(ValueError):
        add(hm, marked_hamiltonian(4, 0))


def test_norm_bounds_dominate_spectrum():
    cases = [
        walk_hamiltonian(make_graph("glued_trees", 2, seed=0), 1.0),
        add(hypercube_qubit_hamiltonian(4, 0.3), marked_hamiltonian(16, 2)),
        ising_hamiltonian({(0, 1): 2.0}, [0.5, -1.5]),
    ]
    for h in cases:
        assert np.abs(np.linalg.eigvalsh(h.to_dense())).max() <= h.norm_bound() + 1e-12


def test_validation_errors():
    with pytest.raises(ValueError):
        MatrixHamiltonian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        DiagonalHamiltonian(np.array([1j]))
    with pytest.raises(ValueError):
        HypercubeHamiltonian(0, 1.0)
    with pytest.raises(ValueError):
        hypercube_qubit_hamiltonian(3, 0.0)
    with pytest.raises(ValueError):
        walk_hamiltonian(make_graph("line", 3), -1.0)
    with pytest.raises(ValueError):
        marked_hamiltonian(4, 4)
    with pytest.raises(ValueError):
        hypercube_qubit_hamiltonian(2, 1.0).apply(np.ones(3))
