"""The Maximum Ensemble Algorithm and its exact verification oracles.

A partition of the hypercube supports a lumped Markov chain iff for every
pair of states in one block the distance histogram against every block
matches.  Histograms are exact integer vectors (a_0..a_n), never polynomial
evaluations in theta, so all comparisons here are exact integer equality.

The algorithm iterates Bipartition: per block, keep the states whose
histograms against every current block agree with the block's smallest
member, split off the rest, repeat to fixpoint.  The fixpoint is the unique
coarsest Markov-respecting refinement of the starting partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._bits import popcount_table
from .inheritance import Partition

_CHUNK = 1 << 22  # elements per bincount batch; bounds temporary arrays at ~32 MB


class AlgorithmError(RuntimeError):
    """Raised when an internal convergence guarantee is violated."""


def coefficient_vector(x: int, members: Iterable[int], n: int) -> tuple[int, ...]:
    """a_k = number of block members at Hamming distance k from ``x``.

    The lumped transition probability out of x into the block is
    sum_k a_k theta^k (1-theta)^(n-k); equality of these integer vectors is
    exactly coefficient-wise equality of the transition polynomials.
    """
    arr = np.fromiter(members, dtype=np.int64)
    if not 0 <= x < (1 << n):
        raise ValueError(f"state {x} out of range for n={n}")
    if arr.size and (arr.min() < 0 or arr.max() >= (1 << n)):
        raise ValueError("block member out of range")
    pc = popcount_table(n)
    counts = np.bincount(pc[arr ^ x], minlength=n + 1)
    return tuple(int(c) for c in counts)


def _hist_rows(rows: np.ndarray, block_members: np.ndarray, n: int) -> np.ndarray:
    """Distance histograms of the given states against one block.

    Returns a (len(rows), n+1) int64 array; column k counts members at
    distance k.
    """
    from . import _kernels

    pc = popcount_table(n)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    members = np.ascontiguousarray(block_members, dtype=np.int64)
    width = n + 1
    hist = np.zeros(rows.size * width, dtype=np.int64)
    _kernels.hist_rows(rows, members, pc, width, hist)
    return hist.reshape(rows.size, width)


def _hist_all_states(block_members: np.ndarray, n: int) -> np.ndarray:
    """Distance histograms of every state against one block."""
    return _hist_rows(np.arange(1 << n, dtype=np.int64), block_members, n)


def _anchor_indices(P: Partition) -> np.ndarray:
    """Smallest member of each block (blocks are stored sorted)."""
    return np.array([int(b[0]) for b in P.blocks()], dtype=np.int64)


@dataclass
class EnsembleStats:
    """Trace of a maximum-ensemble run, for invariant checks and telemetry."""

    passes: int = 0
    splits_per_pass: list[int] = field(default_factory=list)
    partitions: list[Partition] = field(default_factory=list)
    finalized_per_pass: list[list[frozenset[int]]] = field(default_factory=list)


def bipartition(P: Partition, stats: Optional[EnsembleStats] = None) -> Partition:
    """One refinement pass: split each block into the states matching its
    smallest member's histograms against every block, and the rest."""
    n = P.n
    anchors = _anchor_indices(P)
    anchor_of_state = anchors[P.block_of]
    flagged = np.zeros(1 << n, dtype=bool)
    for members in P.blocks():
        hist = _hist_all_states(members, n)
        flagged |= (hist != hist[anchor_of_state]).any(axis=1)
    if not flagged.any():
        if stats is not None:
            stats.splits_per_pass.append(0)
            stats.finalized_per_pass.append([frozenset(map(int, b)) for b in P.blocks()])
        return P
    refined = Partition(n, P.block_of.astype(np.int64) * 2 + flagged)
    if stats is not None:
        stats.splits_per_pass.append(refined.num_blocks - P.num_blocks)
        stats.finalized_per_pass.append(
            [
                frozenset(map(int, b))
                for b in refined.blocks()
                if not flagged[b[0]]  # the kept half, anchored at the old minimum
            ]
        )
    return refined


def maximum_ensemble(
    E: Partition, *, return_stats: bool = False
) -> Partition | tuple[Partition, EnsembleStats]:
    """Iterate :func:`bipartition` from ``E`` to its fixpoint.

    The fixpoint satisfies the Markov criterion, refines ``E``, and is the
    unique coarsest such partition.  Every non-final pass strictly increases
    the block count, so 2^n + 1 passes is a hard bound; exceeding it fails
    loudly.  (Emission partitions of pedigrees converge far faster, but the
    often-quoted n+1 bound does not hold for arbitrary inputs: a pass only
    guarantees peeling one matching class off each unstable block.)

    Each pass has identical semantics to :func:`bipartition` but skips work
    that provably cannot change: histograms against blocks untouched by the
    previous pass are only recomputed for states whose block anchor is new.
    """
    stats = EnsembleStats()
    n = E.n
    size = 1 << n
    current = E
    changed_splitters: Optional[list[int]] = None  # None = first pass, scan everything
    fresh_anchor_blocks: list[int] = []
    for _ in range(size + 1):
        stats.passes += 1
        stats.partitions.append(current)
        blocks = current.blocks()
        anchors = _anchor_indices(current)
        anchor_of_state = anchors[current.block_of]
        flagged = np.zeros(size, dtype=bool)
        splitters = list(range(len(blocks))) if changed_splitters is None else changed_splitters
        for j in splitters:
            hist = _hist_all_states(blocks[j], n)
            flagged |= (hist != hist[anchor_of_state]).any(axis=1)
        if changed_splitters is not None and fresh_anchor_blocks:
            subset = np.sort(np.concatenate([blocks[b] for b in fresh_anchor_blocks]))
            anchor_pos = np.searchsorted(subset, anchor_of_state[subset])
            splitter_set = set(splitters)
            sub_flags = np.zeros(subset.size, dtype=bool)
            for j in range(len(blocks)):
                if j in splitter_set:
                    continue
                hist = _hist_rows(subset, blocks[j], n)
                sub_flags |= (hist != hist[anchor_pos]).any(axis=1)
            flagged[subset] |= sub_flags
        if not flagged.any():
            stats.splits_per_pass.append(0)
            stats.finalized_per_pass.append([frozenset(map(int, b)) for b in blocks])
            break
        refined = Partition(n, current.block_of.astype(np.int64) * 2 + flagged)
        stats.splits_per_pass.append(refined.num_blocks - current.num_blocks)
        stats.finalized_per_pass.append(
            [frozenset(map(int, b)) for b in refined.blocks() if not flagged[b[0]]]
        )
        old_had_split = np.bincount(
            current.block_of[flagged], minlength=current.num_blocks
        ).astype(bool)
        new_blocks = refined.blocks()
        changed_splitters = [
            b for b, members in enumerate(new_blocks)
            if old_had_split[current.block_of[members[0]]]
        ]
        fresh_anchor_blocks = [
            b for b, members in enumerate(new_blocks) if flagged[members[0]]
        ]
        current = refined
    else:
        raise AlgorithmError(
            f"bipartition failed to converge within {size + 1} passes (n={n})"
        )
    if return_stats:
        return current, stats
    return current


@dataclass(frozen=True)
class MarkovWitness:
    """Certificate of a Markov-property violation."""

    x1: int
    x2: int
    block: tuple[int, ...]
    vector1: tuple[int, ...]
    vector2: tuple[int, ...]


def verify_markov(P: Partition) -> tuple[bool, Optional[MarkovWitness]]:
    """Exact lumpability check with a deterministic violation certificate.

    True iff every pair of states in a block has identical distance
    histograms against every block.  On failure the witness reports, against
    the smallest separating block, the smallest members of the two largest
    histogram classes inside the first violating block: the pair that the
    refinement would actually pull apart.
    """
    n = P.n
    blocks = P.blocks()
    scan_order = sorted(range(len(blocks)), key=lambda b: (len(blocks[b]), int(blocks[b][0])))
    for j in scan_order:
        hist = _hist_all_states(blocks[j], n)
        for i in scan_order:
            members = blocks[i]
            if members.size < 2:
                continue
            rows = hist[members]
            uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
            if len(uniq) == 1:
                continue
            sizes = np.bincount(inverse)
            mins = [int(members[inverse == c].min()) for c in range(len(uniq))]
            ranked = sorted(range(len(uniq)), key=lambda c: (-sizes[c], mins[c]))
            x1, x2 = sorted((mins[ranked[0]], mins[ranked[1]]))
            return False, MarkovWitness(
                x1=x1,
                x2=x2,
                block=tuple(int(y) for y in blocks[j]),
                vector1=coefficient_vector(x1, blocks[j], n),
                vector2=coefficient_vector(x2, blocks[j], n),
            )
    return True, None


def verify_refines(P: Partition, Q: Partition) -> bool:
    """True iff every block of P lies inside a single block of Q."""
    if P.n != Q.n:
        raise ValueError(f"ground sets differ: n={P.n} vs n={Q.n}")
    for members in P.blocks():
        if np.unique(Q.block_of[members]).size > 1:
            return False
    return True
