"""End-to-end composition: pedigree -> pruned pedigree -> emission partition
-> minimal ensemble partition, with either the full or bootstrap algorithm."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .bootstrap import BootstrapStats, bootstrap_maximum_ensemble, known_isometries
from .emission import emission_partition, proper_automorphisms
from .ensemble import maximum_ensemble
from .inheritance import Partition, identity_states
from .pedigree import DEFAULT_MEIOSIS_CAP, MeiosisCapError, Pedigree, prune_irrelevant
from .symmetry import Isometry, orbits_on_blocks

FULL_MAX_MEIOSES = 14
BOOTSTRAP_MAX_MEIOSES = 18


@dataclass
class Reduction:
    pedigree: Pedigree  # the pedigree the partition lives on (post-pruning)
    partition: Partition
    emission: Partition
    identity: Partition
    variant: str
    generators: tuple[Isometry, ...]
    bootstrap_stats: Optional[BootstrapStats] = None


def default_max_meioses(variant: str) -> int:
    return BOOTSTRAP_MAX_MEIOSES if variant == "bootstrap" else FULL_MAX_MEIOSES


def reduce_state_space(
    ped: Pedigree,
    *,
    variant: str = "full",
    prune: bool = True,
    prune_cap: int = DEFAULT_MEIOSIS_CAP,
    max_meioses: Optional[int] = None,
) -> Reduction:
    """Compute the minimal ensemble partition for a pedigree.

    ``variant`` selects the full bipartition fixpoint or the bootstrap run
    on known-isometry orbit representatives; both return the identical
    partition.  ``max_meioses`` (default 14 full / 18 bootstrap) bounds the
    post-pruning state space and raises :class:`MeiosisCapError` beyond it.
    """
    if variant not in ("full", "bootstrap"):
        raise ValueError(f"unknown variant {variant!r}")
    if prune:
        ped = prune_irrelevant(ped, cap=max(prune_cap, ped.n))
    cap = default_max_meioses(variant) if max_meioses is None else max_meioses
    if ped.n > cap:
        raise MeiosisCapError(
            f"{ped.n} meioses after pruning exceeds the {variant} cap of {cap}"
        )
    identity = identity_states(ped, cap=max(DEFAULT_MEIOSIS_CAP, ped.n))
    gens = proper_automorphisms(ped)
    emission = orbits_on_blocks(gens, identity)
    if variant == "full":
        partition = maximum_ensemble(emission)
        return Reduction(ped, partition, emission, identity, variant, gens)
    stats = BootstrapStats()
    known = known_isometries(ped)
    partition = bootstrap_maximum_ensemble(ped, emission, known, stats=stats)
    return Reduction(ped, partition, emission, identity, variant, known, stats)
