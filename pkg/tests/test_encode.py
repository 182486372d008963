from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from ctwalk.encode import bit_width, bits_to_index, encoding_cost, hamming_neighbors, index_to_bits


def test_big_endian_labels():
    assert index_to_bits(5, 3) == "101"
    assert index_to_bits(1, 4) == "0001"
    assert bits_to_index("0110") == 6


def test_neighbors_flip_low_bit_first():
    assert hamming_neighbors(0, 3) == (1, 2, 4)
    assert hamming_neighbors(5, 3) == (4, 7, 1)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
def test_round_trip(nj):
    n, j = nj
    bits = index_to_bits(j, n)
    assert len(bits) == n and bits_to_index(bits) == j
    for k, nb in enumerate(hamming_neighbors(j, n)):
        assert sum(a != b for a, b in zip(bits, index_to_bits(nb, n))) == 1
        assert index_to_bits(nb, n)[n - 1 - k] != bits[n - 1 - k]


@pytest.mark.parametrize("n", range(1, 21))
def test_cost_powers_of_two(n):
    assert encoding_cost(2**n) == (2**n, n)


@given(st.integers(1, 10**6))
def test_bit_width_is_ceil_log2(N):
    expected = max(1, math.ceil(math.log2(N))) if N > 1 else 1
    assert bit_width(N) == expected
    assert 2 ** bit_width(N) >= N


@pytest.mark.parametrize("call", [lambda: index_to_bits(8, 3), lambda: index_to_bits(-1, 3),
                                  lambda: index_to_bits(0, 0), lambda: bits_to_index("012"),
                                  lambda: bits_to_index(""), lambda: encoding_cost(0)])
def test_errors(call):
    with pytest.raises(ValueError):
        call()
