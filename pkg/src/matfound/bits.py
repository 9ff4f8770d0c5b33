"""Integer bitmask helpers. Bit ``i`` stands for the i-th ground element."""

from itertools import combinations

import numpy as np


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits(x: int) -> list[int]:
    """Indices of set bits, ascending."""
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


def from_indices(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def lowest(x: int) -> int:
    """Index of the lowest set bit; -1 for zero."""
    return (x & -x).bit_length() - 1


def full(n: int) -> int:
    return (1 << n) - 1


def lex_key(x: int) -> tuple[int, ...]:
    """Sort key for "lexicographically least" subset choices (by index tuple)."""
    return tuple(bits(x))


def k_subsets(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as a uint64 array, in lexicographic index order."""
    if k < 0 or k > n:
        return np.zeros(0, dtype=np.uint64)
    masks = [from_indices(c) for c in combinations(range(n), k)]
    return np.array(masks, dtype=np.uint64)


def all_subsets(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.uint64)
