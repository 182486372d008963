"""Binary labels for walk vertices.

Two bit-order conventions are in use and both are fixed:

* ``index_to_bits`` renders labels big-endian, so vertex 5 of a 3-cube is
  ``"101"``.
* qubit ``k`` is bit position ``k`` counted from the least-significant end,
  so flipping qubit ``k`` maps ``j`` to ``j ^ (1 << k)``.
"""

from __future__ import annotations

from typing import NamedTuple

__all__ = [
    "EncodingCost",
    "index_to_bits",
    "bits_to_index",
    "hamming_neighbors",
    "encoding_cost",
    "bit_width",
]


class EncodingCost(NamedTuple):
    unary_symbols: int
    binary_bits: int


def _check_index(j: int, n: int) -> None:
    if n < 1:
        raise ValueError("bit width must be >= 1")
    if not 0 <= j < (1 << n):
        raise ValueError(f"index {j} out of range for {n} bits")


def index_to_bits(j: int, n: int) -> str:
    _check_index(j, n)
    return format(j, f"0{n}b")


def bits_to_index(bits: str) -> int:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(bits, 2)


def hamming_neighbors(j: int, n: int) -> tuple[int, ...]:
    """Indices reached by flipping each qubit of ``j``, qubit 0 first."""
    _check_index(j, n)
    return tuple(j ^ (1 << k) for k in range(n))


def bit_width(N: int) -> int:
    """Bits needed to index ``N`` items (one bit minimum)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return max(1, (N - 1).bit_length())


def encoding_cost(N: int) -> EncodingCost:
    """Unary marks versus binary index bits for a register of ``N`` items."""
    return EncodingCost(unary_symbols=N, binary_bits=bit_width(N))
