"""Bit-vector conventions and popcount utilities shared across the package.

An inheritance state over n meioses is stored as a plain Python (or numpy)
integer.  Meiosis j (0-based) lives at integer bit position ``n - 1 - j``, so
the binary string rendering of a state reads meiosis 1 on the left, exactly
as states are written in fixtures ("1001" puts meiosis 1 = 1, meiosis 4 = 1).
"""

from __future__ import annotations

import numpy as np

_POPCOUNT_CACHE: dict[int, np.ndarray] = {}


def popcount_table(n: int) -> np.ndarray:
    """Hamming weights of 0 .. 2^n - 1 as a uint8 array (cached per width)."""
    if n < 0:
        raise ValueError("width must be non-negative")
    table = _POPCOUNT_CACHE.get(n)
    if table is None:
        table = np.zeros(1, dtype=np.uint8)
        for _ in range(n):
            table = np.concatenate([table, table + 1])
        table.setflags(write=False)
        _POPCOUNT_CACHE[n] = table
    return table


def popcount(x: int) -> int:
    return int(x).bit_count()


def state_to_string(x: int, n: int) -> str:
    """Render state x as an n-character binary string, meiosis 1 leftmost."""
    if n == 0:
        return ""
    return format(x, f"0{n}b")


def string_to_state(s: str) -> int:
    return int(s, 2) if s else 0


def get_bit(x: int, j: int, n: int) -> int:
    """Value of meiosis j (0-based) in state x of width n."""
    return (x >> (n - 1 - j)) & 1


def set_bit(x: int, j: int, n: int, value: int) -> int:
    mask = 1 << (n - 1 - j)
    return (x | mask) if value else (x & ~mask)


def bit_array(states: np.ndarray, j: int, n: int) -> np.ndarray:
    """Vectorized meiosis-j extraction for an array of states."""
    return (states >> (n - 1 - j)) & 1
