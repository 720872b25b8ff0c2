"""Hypercube isometries (bit permutation after an XOR switch) and orbits.

Every Hamming-distance-preserving map of the hypercube factors uniquely as
T = pi . phi_a with phi_a(x) = a ^ x, and that (pi, a) pair is the stored
canonical form.  Orbit computation is the classic worklist algorithm with an
O(1) seen-check, run over numpy state maps so each generator application is
a single gather.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._bits import get_bit, state_to_string
from .inheritance import Partition


@dataclass(frozen=True)
class Isometry:
    """T(x) = perm(switch ^ x); perm[j] is the image position of bit j."""

    n: int
    perm: tuple[int, ...]
    switch: int

    def __post_init__(self):
        if len(self.perm) != self.n or sorted(self.perm) != list(range(self.n)):
            raise ValueError(f"perm is not a permutation of 0..{self.n - 1}")
        if not 0 <= self.switch < (1 << self.n):
            raise ValueError("switch out of range")

    @classmethod
    def identity(cls, n: int) -> "Isometry":
        return cls(n, tuple(range(n)), 0)

    @classmethod
    def from_switch(cls, n: int, switch: int) -> "Isometry":
        return cls(n, tuple(range(n)), switch)

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]], switch: int = 0) -> "Isometry":
        """Build from 1-based bit cycles, e.g. [(1, 4), (2, 3)]."""
        perm = list(range(n))
        seen: set[int] = set()
        for cycle in cycles:
            for pos in cycle:
                if not 1 <= pos <= n:
                    raise ValueError(f"cycle entry {pos} out of range 1..{n}")
                if pos - 1 in seen:
                    raise ValueError(f"bit {pos} appears in two cycles")
                seen.add(pos - 1)
            rotated = list(cycle[1:]) + [cycle[0]]
            for a, b in zip(cycle, rotated):
                perm[a - 1] = b - 1
        return cls(n, tuple(perm), switch)

    @property
    def is_identity(self) -> bool:
        return self.switch == 0 and self.perm == tuple(range(self.n))

    def apply(self, x: int) -> int:
        """Apply to a single state."""
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"state {x} out of range for width {self.n}")
        y = self.switch ^ x
        out = 0
        for j in range(self.n):
            if get_bit(y, j, self.n):
                out |= 1 << (self.n - 1 - self.perm[j])
        return out

    @cached_property
    def state_map(self) -> np.ndarray:
        """T as a length-2^n lookup table (read-only)."""
        n = self.n
        states = np.arange(1 << n, dtype=np.int64)
        y = states ^ self.switch
        out = np.zeros_like(states)
        for j in range(n):
            out |= ((y >> (n - 1 - j)) & 1) << (n - 1 - self.perm[j])
        out.setflags(write=False)
        return out

    def inverse(self) -> "Isometry":
        # T^{-1}(x) = phi_a(pi^{-1}(x)) = pi^{-1}(pi(a) ^ x)
        inv = [0] * self.n
        for j, p in enumerate(self.perm):
            inv[p] = j
        switched = 0
        for j in range(self.n):
            if get_bit(self.switch, j, self.n):
                switched |= 1 << (self.n - 1 - self.perm[j])
        return Isometry(self.n, tuple(inv), switched)

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles of the bit permutation, 1-based, canonical."""
        seen: set[int] = set()
        out = []
        for start in range(self.n):
            if start in seen or self.perm[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            j = self.perm[start]
            while j != start:
                cycle.append(j)
                seen.add(j)
                j = self.perm[j]
            out.append(tuple(p + 1 for p in cycle))
        return out

    def to_text(self) -> str:
        """Fixture form, e.g. ``perm=(1 4)(2 3) switch=0110``."""
        cycles = self.cycles()
        perm_str = "".join("(" + " ".join(map(str, c)) + ")" for c in cycles) or "()"
        return f"perm={perm_str} switch={state_to_string(self.switch, self.n)}"

    @classmethod
    def from_text(cls, text: str, n: int) -> "Isometry":
        m = re.fullmatch(r"\s*perm=((?:\([\d\s]*\))+)\s+switch=([01]*)\s*", text)
        if not m:
            raise ValueError(f"cannot parse isometry {text!r}")
        cycles = [
            tuple(int(tok) for tok in body.split())
            for body in re.findall(r"\(([\d\s]*)\)", m.group(1))
        ]
        cycles = [c for c in cycles if len(c) > 1]
        switch_str = m.group(2)
        if len(switch_str) != n:
            raise ValueError(f"switch width {len(switch_str)} != {n}")
        return cls.from_cycles(n, cycles, int(switch_str, 2) if n else 0)

    def __repr__(self) -> str:
        return f"Isometry({self.to_text()}, n={self.n})"


def compose(t1: Isometry, t2: Isometry) -> Isometry:
    """The isometry acting as x -> t1(t2(x)), renormalized to (perm, switch).

    pi1(a1 ^ pi2(a2 ^ x)) = (pi1 . pi2)((pi2^{-1}(a1) ^ a2) ^ x).
    """
    if t1.n != t2.n:
        raise ValueError(f"width mismatch: {t1.n} != {t2.n}")
    n = t1.n
    perm = tuple(t1.perm[t2.perm[j]] for j in range(n))
    pulled = 0
    for j in range(n):
        if get_bit(t1.switch, t2.perm[j], n):
            pulled |= 1 << (n - 1 - j)
    return Isometry(n, perm, pulled ^ t2.switch)


def orbits(generators: Iterable[Isometry], n: int) -> Partition:
    """Orbits of the generated group acting on all 2^n states.

    Worklist algorithm: pull the smallest unseen state, expand its orbit to
    closure under all generators, repeat.  Orbit ids come out sorted by
    smallest member because states are scanned in natural order.
    """
    gens = list(generators)
    for g in gens:
        if g.n != n:
            raise ValueError(f"generator width {g.n} != {n}")
    size = 1 << n
    maps = [g.state_map for g in gens if not g.is_identity]
    orbit_of = np.full(size, -1, dtype=np.int64)
    next_id = 0
    for start in range(size):
        if orbit_of[start] >= 0:
            continue
        orbit_of[start] = next_id
        frontier = np.array([start], dtype=np.int64)
        while frontier.size:
            images = []
            for m in maps:
                img = m[frontier]
                img = img[orbit_of[img] < 0]
                if img.size:
                    orbit_of[img] = next_id
                    images.append(img)
            frontier = np.unique(np.concatenate(images)) if images else np.empty(0, np.int64)
        next_id += 1
    return Partition(n, orbit_of)


def orbits_on_blocks(generators: Iterable[Isometry], base: Partition) -> Partition:
    """Coarsen ``base`` by the group action: blocks merge whenever some
    generator maps a member of one into the other (transitively closed)."""
    gens = [g for g in generators if not g.is_identity]
    for g in gens:
        if g.n != base.n:
            raise ValueError(f"generator width {g.n} != partition width {base.n}")
    k = base.num_blocks
    parent = list(range(k))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    block = base.block_of
    for g in gens:
        pairs = np.unique(
            np.stack([block, block[g.state_map]], axis=1), axis=0
        )
        for a, b in pairs:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[rb] = ra
    roots = np.array([find(b) for b in range(k)])
    return Partition(base.n, roots[block])
