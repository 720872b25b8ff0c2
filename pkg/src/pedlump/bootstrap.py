"""Cheaply detected isometries (founder, chain, couple) and the bootstrap
Maximum Ensemble algorithm running on one representative per orbit.

The bootstrap evaluates the distance-histogram criterion only at orbit
representatives and expands every split to whole orbits, cutting a pass
from 2^n * 2^n to k * 2^n work for k orbits.  Because orbit mates are
related by isometries that fix every block of the evolving partition, the
intermediate partitions (and hence the result) match the full algorithm
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._bits import popcount_table
from .ensemble import AlgorithmError
from .inheritance import Partition
from .pedigree import MATERNAL, PATERNAL, Meiosis, Pedigree
from .symmetry import Isometry, orbits


class GeneratorError(ValueError):
    """A supplied generator does not respect the emission partition."""


def _untyped(ped: Pedigree, ind_id: str) -> bool:
    ind = ped.individual(ind_id)
    return not ind.genotyped and not ind.of_interest


def _meiosis_from(ped: Pedigree, parent: str, child: str) -> Meiosis:
    role = PATERNAL if ped.individual(child).father == parent else MATERNAL
    return Meiosis(child, role)


def founder_isometries(ped: Pedigree) -> tuple[Isometry, ...]:
    """One switch per untyped founder, flipping every indexed meiosis from
    that founder to a child. The founder's two alleles are indistinguishable,
    so exchanging their roles relabels nothing observable."""
    out = []
    for f in ped.founders():
        if not _untyped(ped, f):
            continue
        switch = 0
        for child in ped.children_of(f):
            m = _meiosis_from(ped, f, child)
            if ped.has_meiosis(m):
                switch |= 1 << (ped.n - 1 - ped.meiosis_index(m))
        if switch:
            out.append(Isometry.from_switch(ped.n, switch))
    return tuple(sorted(out, key=lambda t: t.switch))


def _pure_lineage_member(ped: Pedigree, ind_id: str, lineage_parent: Optional[str]) -> bool:
    """True when ind can sit inside a collapsible single-child lineage:
    untyped, exactly one child, and every incoming founder private."""
    ind = ped.individual(ind_id)
    if ind.is_founder or not _untyped(ped, ind_id):
        return False
    if len(ped.children_of(ind_id)) != 1:
        return False
    for parent in (ind.father, ind.mother):
        if parent == lineage_parent:
            continue
        p = ped.individual(parent)
        if not p.is_founder or len(ped.children_of(parent)) != 1 or not _untyped(ped, parent):
            return False
    return True


def chain_isometries(ped: Pedigree) -> tuple[Isometry, ...]:
    """One cyclic bit permutation per maximal ungenotyped single-child
    lineage, acting on the meioses whose parent is a lineage member plus the
    oldest member's paternal meiosis; zero switch.

    Lineages of length one are skipped (a 1-cycle is the identity), as is
    any lineage with one of its meioses absent from the index.
    """
    member_of: set[str] = set()
    out = []
    for top in sorted(ped.individuals):
        if top in member_of or not _pure_lineage_member(ped, top, None):
            continue
        ind = ped.individual(top)
        # The oldest member needs both parents to be private founders.
        if not ped.individual(ind.father).is_founder:
            continue
        members = [top]
        while True:
            nxt = ped.children_of(members[-1])[0]
            if _pure_lineage_member(ped, nxt, members[-1]):
                members.append(nxt)
            else:
                break
        member_of.update(members)
        if len(members) < 2:
            continue
        bits = [Meiosis(members[0], PATERNAL)]
        bits += [_meiosis_from(ped, a, b) for a, b in zip(members, members[1:])]
        if not all(ped.has_meiosis(m) for m in bits):
            continue
        cycle = tuple(ped.meiosis_index(m) + 1 for m in bits)
        out.append(Isometry.from_cycles(ped.n, [cycle]))
    return tuple(sorted(out, key=lambda t: t.perm))


def couple_isometries(ped: Pedigree) -> tuple[Isometry, ...]:
    """One isometry per untyped monogamous founder pair: a two-cycle per
    shared child swapping that child's paternal/maternal meiosis bits,
    composed with a switch on every indexed meiosis sourced at a child.

    The switch is what keeps the swap a pedigree automorphism when the
    couple's children have children of their own; for two-generation
    pedigrees it is empty and the isometry is the bare bit permutation.
    """
    out = []
    seen_pairs = set()
    for f in ped.founders():
        ind_f = ped.individual(f)
        if ind_f.sex != "M" or not _untyped(ped, f):
            continue
        kids = ped.children_of(f)
        if not kids:
            continue
        mothers = {ped.individual(c).mother for c in kids}
        if len(mothers) != 1:
            continue
        g = mothers.pop()
        if (f, g) in seen_pairs:
            continue
        seen_pairs.add((f, g))
        ind_g = ped.individual(g)
        if not ind_g.is_founder or not _untyped(ped, g):
            continue
        if set(ped.children_of(g)) != set(kids):
            continue
        cycles = []
        ok = True
        for child in sorted(kids):
            pat, mat = Meiosis(child, PATERNAL), Meiosis(child, MATERNAL)
            has_pat, has_mat = ped.has_meiosis(pat), ped.has_meiosis(mat)
            if has_pat != has_mat:
                ok = False
                break
            if has_pat:
                cycles.append((ped.meiosis_index(pat) + 1, ped.meiosis_index(mat) + 1))
        if not ok or not cycles:
            continue
        switch = 0
        for child in kids:
            for grandchild in ped.children_of(child):
                m = _meiosis_from(ped, child, grandchild)
                if ped.has_meiosis(m):
                    switch |= 1 << (ped.n - 1 - ped.meiosis_index(m))
        out.append(Isometry.from_cycles(ped.n, cycles, switch))
    return tuple(sorted(out, key=lambda t: (t.perm, t.switch)))


def known_isometries(ped: Pedigree) -> tuple[Isometry, ...]:
    """Founder, chain and couple isometries, deduplicated by canonical form."""
    seen: set[Isometry] = set()
    out: list[Isometry] = []
    for iso in founder_isometries(ped) + chain_isometries(ped) + couple_isometries(ped):
        if iso not in seen and not iso.is_identity:
            seen.add(iso)
            out.append(iso)
    return tuple(out)


@dataclass
class BootstrapStats:
    """Telemetry: orbit count and per-pass operation counts."""

    orbit_count: int = 0
    generator_count: int = 0
    passes: int = 0
    refinement_ops: int = 0  # state gathers across all passes, ~ passes * k * 2^n


def bootstrap_maximum_ensemble(
    ped: Pedigree,
    E: Partition,
    generators: Iterable[Isometry],
    *,
    stats: Optional[BootstrapStats] = None,
) -> Partition:
    """Maximum ensemble via representative refinement.

    Every generator must fix each block of ``E`` setwise (validated;
    offenders raise :class:`GeneratorError`).  Orbits of the generated group
    then refine the final partition, so the histogram criterion is evaluated
    only at the smallest member of each orbit and splits are expanded to
    whole orbits.  The result equals ``maximum_ensemble(E)`` exactly.
    """
    n = E.n
    gens = list(generators)
    for g in gens:
        if g.n != n:
            raise GeneratorError(f"generator width {g.n} != {n}")
        if np.any(E.block_of[g.state_map] != E.block_of):
            raise GeneratorError(
                f"generator {g.to_text()} does not respect the emission partition"
            )
    orbit_partition = orbits(gens, n)
    orbit_of = orbit_partition.block_of
    k = orbit_partition.num_blocks
    reps = np.array([int(b[0]) for b in orbit_partition.blocks()], dtype=np.int64)
    if stats is not None:
        stats.orbit_count = k
        stats.generator_count = len(gens)

    pc = popcount_table(n)
    states = np.arange(1 << n, dtype=np.int64)
    label = E.block_of[reps].astype(np.int64)  # per-orbit block label

    # Like the full algorithm, every non-final pass strictly increases the
    # class count, so k+1 passes bounds the loop.
    for _ in range(k + 1):
        if stats is not None:
            stats.passes += 1
        state_label = np.ascontiguousarray(label[orbit_of], dtype=np.int64)
        nblocks = int(label.max()) + 1
        width = n + 1

        def hist_of(rep: int) -> np.ndarray:
            from . import _kernels

            out = np.zeros(nblocks * width, dtype=np.int64)
            _kernels.labeled_hist(rep, state_label, pc, width, out)
            return out

        # Anchor representative per class: smallest rep, which is also the
        # smallest member of the expanded block.
        order = np.lexsort((reps, label))
        anchors: dict[int, np.ndarray] = {}
        flagged = np.zeros(k, dtype=bool)
        for idx in order:
            cls = int(label[idx])
            rep = int(reps[idx])
            h = hist_of(rep)
            if stats is not None:
                stats.refinement_ops += 1 << n
            if cls not in anchors:
                anchors[cls] = h
            elif not np.array_equal(anchors[cls], h):
                flagged[idx] = True
        if not flagged.any():
            break
        label = label * 2 + flagged
        _, label = np.unique(label, return_inverse=True)
        label = label.astype(np.int64)
    else:
        raise AlgorithmError(
            f"bootstrap refinement failed to converge within {k + 1} passes (n={n})"
        )
    return Partition(n, label[orbit_of])
