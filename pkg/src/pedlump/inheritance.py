"""Hypercube states, inheritance graphs, IBD signatures and identity states.

Every connected component of an inheritance graph is a tree rooted at exactly
one founder allele, so two alleles are IBD precisely when they trace to the
same founder allele.  That observation lets signatures for all 2^n states be
computed as vectorized founder-origin lookups instead of per-state graph
traversals; the per-state graph walk is kept as the slow reference path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ._bits import bit_array, get_bit, state_to_string, string_to_state
from .pedigree import (
    MATERNAL,
    PATERNAL,
    DEFAULT_MEIOSIS_CAP,
    Meiosis,
    MeiosisCapError,
    Pedigree,
    PedigreeError,
)

PAT_SIDE = "p"
MAT_SIDE = "m"

AlleleLabel = tuple[str, str]  # (individual id, "p" | "m")
IBDSignature = tuple[tuple[AlleleLabel, ...], ...]


# -- partitions -------------------------------------------------------------


class Partition:
    """A partition of the 2^n hypercube vertices into disjoint blocks.

    Stored canonically: block ids are assigned by ascending minimum member,
    members inside a block sort ascending.  Construction from an arbitrary
    labelling therefore normalizes away block/element order, which is what
    makes downstream algorithms order-invariant by design.
    """

    __slots__ = ("n", "block_of", "_blocks")

    def __init__(self, n: int, block_of: np.ndarray):
        block_of = np.asarray(block_of)
        if block_of.shape != (1 << n,):
            raise ValueError(f"block_of must cover all 2^{n} states")
        self.n = n
        # Relabel so block id == rank of the block's smallest member.
        _, first_idx, inverse = np.unique(block_of, return_index=True, return_inverse=True)
        order = np.argsort(first_idx, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        self.block_of = rank[inverse].astype(np.int32)
        self._blocks: Optional[list[np.ndarray]] = None

    @classmethod
    def from_blocks(cls, n: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        size = 1 << n
        block_of = np.full(size, -1, dtype=np.int64)
        for b, members in enumerate(blocks):
            for x in members:
                if not 0 <= x < size:
                    raise ValueError(f"state {x} out of range for n={n}")
                if block_of[x] != -1:
                    raise ValueError(f"state {x} appears in two blocks")
                block_of[x] = b
        if (block_of == -1).any():
            missing = int(np.flatnonzero(block_of == -1)[0])
            raise ValueError(f"state {missing} not covered by any block")
        return cls(n, block_of)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(n, np.arange(1 << n))

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls(n, np.zeros(1 << n, dtype=np.int32))

    @property
    def num_blocks(self) -> int:
        return int(self.block_of.max()) + 1 if self.block_of.size else 0

    def blocks(self) -> list[np.ndarray]:
        if self._blocks is None:
            order = np.argsort(self.block_of, kind="stable")
            bounds = np.searchsorted(self.block_of[order], np.arange(self.num_blocks + 1))
            self._blocks = [
                np.sort(order[bounds[b] : bounds[b + 1]]) for b in range(self.num_blocks)
            ]
        return self._blocks

    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.block_of, minlength=self.num_blocks)

    def block_containing(self, x: int) -> np.ndarray:
        return self.blocks()[int(self.block_of[x])]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.block_of, other.block_of)

    def __hash__(self) -> int:
        return hash((self.n, self.block_of.tobytes()))

    def __len__(self) -> int:
        return self.num_blocks

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, blocks={self.num_blocks})"

    def serialize(self) -> str:
        """Fixture format: one block per line, zero-padded binary states."""
        lines = [
            " ".join(state_to_string(int(x), self.n) for x in block)
            for block in self.blocks()
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None) -> "Partition":
        blocks: list[list[int]] = []
        width: Optional[int] = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            states = line.split()
            for s in states:
                if width is None:
                    width = len(s)
                elif len(s) != width:
                    raise ValueError("inconsistent state widths in partition file")
            blocks.append([string_to_state(s) for s in states])
        if width is None:
            width = 0 if n is None else n
        if n is not None and n != width:
            raise ValueError(f"partition file has width {width}, expected {n}")
        return cls.from_blocks(width, blocks)


# -- inheritance graphs ------------------------------------------------------


@dataclass(frozen=True)
class InheritanceGraph:
    """Forest over allele nodes implied by one inheritance state.

    Nodes are (individual id, side) pairs, two per individual.  Each
    non-founder allele has exactly one incoming edge from the parental allele
    selected by the state; meioses absent from the index contribute their
    edge with the bit fixed to 0 (grand-paternal), which is only done for
    bits certified irrelevant by pruning.
    """

    nodes: tuple[tuple[str, str], ...]
    edges: tuple[tuple[tuple[str, str], tuple[str, str]], ...]

    def components(self) -> list[frozenset[tuple[str, str]]]:
        parent: dict[tuple[str, str], tuple[str, str]] = {v: v for v in self.nodes}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict[tuple[str, str], set] = {}
        for v in self.nodes:
            groups.setdefault(find(v), set()).add(v)
        return [frozenset(g) for g in groups.values()]


def _edge_bit(ped: Pedigree, x: int, meiosis: Meiosis) -> int:
    if ped.has_meiosis(meiosis):
        return get_bit(x, ped.meiosis_index(meiosis), ped.n)
    return 0  # pruned bits are provably signature-neutral; pin them to 0


def inheritance_graph(ped: Pedigree, x: int) -> InheritanceGraph:
    """Build the allele-transmission forest for state ``x``."""
    if not 0 <= x < (1 << ped.n):
        raise ValueError(f"state {x} out of range for n={ped.n}")
    nodes = tuple(
        (ind_id, side)
        for ind_id in sorted(ped.individuals)
        for side in (PAT_SIDE, MAT_SIDE)
    )
    edges = []
    for ind_id in sorted(ped.individuals):
        ind = ped.individual(ind_id)
        if ind.is_founder:
            continue
        for role, side, parent in (
            (PATERNAL, PAT_SIDE, ind.father),
            (MATERNAL, MAT_SIDE, ind.mother),
        ):
            bit = _edge_bit(ped, x, Meiosis(ind_id, role))
            parent_side = MAT_SIDE if bit else PAT_SIDE
            edges.append(((parent, parent_side), (ind_id, side)))
    return InheritanceGraph(nodes=nodes, edges=tuple(edges))


# -- IBD signatures ----------------------------------------------------------


def interest_allele_labels(ped: Pedigree) -> tuple[AlleleLabel, ...]:
    """Labelled alleles in the fixed global order (id, paternal first)."""
    return tuple(
        (ind_id, side) for ind_id in ped.interest_ids() for side in (PAT_SIDE, MAT_SIDE)
    )


def _founder_origin(ped: Pedigree, x: int, node: AlleleLabel) -> AlleleLabel:
    ind_id, side = node
    while True:
        ind = ped.individual(ind_id)
        if ind.is_founder:
            return (ind_id, side)
        role = PATERNAL if side == PAT_SIDE else MATERNAL
        bit = _edge_bit(ped, x, Meiosis(ind_id, role))
        ind_id = ind.father if role == PATERNAL else ind.mother
        side = MAT_SIDE if bit else PAT_SIDE


def ibd_signature(ped: Pedigree, x: int) -> IBDSignature:
    """Partition of the labelled alleles by shared founder origin.

    Blocks are sorted by their smallest member under the global allele order,
    so equal signatures compare equal as plain tuples.
    """
    labels = interest_allele_labels(ped)
    if not labels:
        raise PedigreeError("interest set is empty")
    slot = {label: i for i, label in enumerate(labels)}
    origin_groups: dict[AlleleLabel, list[AlleleLabel]] = {}
    for label in labels:
        origin_groups.setdefault(_founder_origin(ped, x, label), []).append(label)
    blocks = sorted(origin_groups.values(), key=lambda block: slot[block[0]])
    return tuple(tuple(block) for block in blocks)


# -- vectorized signature machinery ------------------------------------------


def _origin_matrix(ped: Pedigree) -> np.ndarray:
    """Founder-origin ids for every labelled allele in every state.

    Returns a (2^n, L) uint16 array where L = number of labelled alleles and
    entries are small ids of founder allele nodes.  Intermediate per-allele
    arrays are freed as soon as all children consumed them.
    """
    n = ped.n
    size = 1 << n
    states = np.arange(size, dtype=np.int64)
    founder_ids: dict[AlleleLabel, int] = {}
    for ind_id in sorted(ped.individuals):
        if ped.individual(ind_id).is_founder:
            for side in (PAT_SIDE, MAT_SIDE):
                founder_ids[(ind_id, side)] = len(founder_ids)

    labels = interest_allele_labels(ped)
    label_set = set(labels)
    pending_children = {i: len(ped.children_of(i)) for i in ped.ids()}

    origins: dict[str, tuple[np.ndarray | int, np.ndarray | int]] = {}
    for ind_id in ped.topo_order():
        ind = ped.individual(ind_id)
        if ind.is_founder:
            origins[ind_id] = (
                founder_ids[(ind_id, PAT_SIDE)],
                founder_ids[(ind_id, MAT_SIDE)],
            )
            continue
        pair = []
        for role, parent in ((PATERNAL, ind.father), (MATERNAL, ind.mother)):
            pat_origin, mat_origin = origins[parent]
            m = Meiosis(ind_id, role)
            if ped.has_meiosis(m):
                sel = bit_array(states, ped.meiosis_index(m), n).astype(bool)
                pair.append(np.where(sel, mat_origin, pat_origin).astype(np.uint16))
            else:
                value = pat_origin  # pruned bit fixed to 0
                pair.append(value)
        origins[ind_id] = (pair[0], pair[1])
        for parent in (ind.father, ind.mother):
            pending_children[parent] -= 1
            if pending_children[parent] == 0 and not any(
                (parent, side) in label_set for side in (PAT_SIDE, MAT_SIDE)
            ):
                del origins[parent]

    out = np.empty((size, len(labels)), dtype=np.uint16)
    for col, (ind_id, side) in enumerate(labels):
        value = origins[ind_id][0 if side == PAT_SIDE else 1]
        out[:, col] = value
    return out


def _canonical_codes(origin: np.ndarray) -> np.ndarray:
    """Per-state canonical partition code: column j gets the index of the
    first column sharing its origin.  Equal codes == equal signatures."""
    size, L = origin.shape
    codes = np.empty((size, L), dtype=np.uint8)
    for j in range(L):
        col = np.full(size, j, dtype=np.uint8)
        for i in range(j - 1, -1, -1):
            col = np.where(origin[:, i] == origin[:, j], np.uint8(i), col)
        codes[:, j] = col
    return codes


def _group_rows(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense group ids for equal rows plus one representative row index per
    group.  Accumulates columns into an int64 key, re-densifying before the
    key could overflow; exact (no hashing)."""
    size, L = codes.shape
    key = np.zeros(size, dtype=np.int64)
    radix = int(codes.max()) + 2 if size else 2
    capacity = (1 << 62) // radix
    for j in range(L):
        if key.size and int(key.max()) >= capacity:
            _, key = np.unique(key, return_inverse=True)
            key = key.astype(np.int64)
        key = key * radix + codes[:, j]
    uniq, first, inverse = np.unique(key, return_index=True, return_inverse=True)
    return inverse.astype(np.int64), first


def signature_index(ped: Pedigree) -> tuple[np.ndarray, tuple[IBDSignature, ...]]:
    """Signature class id per state plus the class signatures themselves.

    Class ids are dense; ``signatures[sid]`` matches :func:`ibd_signature`
    output for any state of that class.
    """
    labels = interest_allele_labels(ped)
    if not labels:
        raise PedigreeError("interest set is empty")
    origin = _origin_matrix(ped)
    codes = _canonical_codes(origin)
    sig_idx, first = _group_rows(codes)
    signatures = []
    for rep in first:
        row = codes[rep]
        groups: dict[int, list[AlleleLabel]] = {}
        for j, label in enumerate(labels):
            groups.setdefault(int(row[j]), []).append(label)
        blocks = [groups[key] for key in sorted(groups)]
        signatures.append(tuple(tuple(block) for block in blocks))
    return sig_idx, tuple(signatures)


def relevant_meiosis_mask(ped: Pedigree) -> list[bool]:
    """For each indexed meiosis, whether flipping its bit can ever change a
    signature (exhaustive over all states)."""
    n = ped.n
    sig_idx, _ = signature_index(ped)
    states = np.arange(1 << n, dtype=np.int64)
    mask = []
    for j in range(n):
        flipped = states ^ (1 << (n - 1 - j))
        mask.append(bool(np.any(sig_idx != sig_idx[flipped])))
    return mask


def identity_states(ped: Pedigree, cap: int = DEFAULT_MEIOSIS_CAP) -> Partition:
    """The identity-state partition: states grouped by IBD signature."""
    if ped.n > cap:
        raise MeiosisCapError(
            f"identity states need an exhaustive pass over 2^{ped.n} states; cap is {cap}"
        )
    sig_idx, _ = signature_index(ped)
    return Partition(ped.n, sig_idx)
