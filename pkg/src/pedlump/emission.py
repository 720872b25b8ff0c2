"""Proper pedigree automorphisms, the emission partition, and emission
probabilities for unordered genotype data.

Identity states distinguish every labelled connected component; emission
probabilities cannot, because genotypes are unordered allele pairs and
ungenotyped lineages are interchangeable.  The emission partition is the
coarsening of the identity states by the group of pedigree automorphisms
that swap whole maternal/paternal lineages consistently.  Each automorphism
is converted to a state-space isometry: a permutation of meiosis bits plus
an XOR switch on every meiosis whose source parent had its sides swapped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .inheritance import (
    IBDSignature,
    MAT_SIDE,
    PAT_SIDE,
    Partition,
    ibd_signature,
    identity_states,
)
from .pedigree import (
    DEFAULT_MEIOSIS_CAP,
    MATERNAL,
    PATERNAL,
    Meiosis,
    Pedigree,
    PedigreeError,
)
from .symmetry import Isometry, orbits_on_blocks

Number = Union[float, Fraction]
SiteGenotypes = Mapping[str, Optional[tuple[str, str]]]

MISSING = "./."


# -- allele frequencies -------------------------------------------------------


class AlleleFrequencies:
    """Founder allele frequencies over a declared alphabet.

    Values may be floats or Fractions; with Fractions every emission
    probability downstream stays exact.
    """

    def __init__(self, freqs: Mapping[str, Number]):
        if not freqs:
            raise ValueError("allele frequency table is empty")
        for symbol, f in freqs.items():
            if not 0 < f <= 1:
                raise ValueError(f"frequency of {symbol!r} must be in (0, 1], got {f}")
        total = sum(freqs.values())
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"frequencies sum to {total}, expected exactly 1")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"frequencies sum to {total!r}, expected 1 within 1e-12")
        self._freqs = dict(freqs)

    def __getitem__(self, symbol: str) -> Number:
        try:
            return self._freqs[symbol]
        except KeyError:
            raise KeyError(f"unknown allele symbol {symbol!r}") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._freqs

    def symbols(self) -> tuple[str, ...]:
        return tuple(self._freqs)

    def items(self):
        return self._freqs.items()

    @classmethod
    def parse(cls, text: str) -> "AlleleFrequencies":
        freqs: dict[str, float] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise ValueError(f"line {line_no}: expected 'symbol frequency'")
            symbol, value = tokens
            if symbol in freqs:
                raise ValueError(f"line {line_no}: duplicate symbol {symbol!r}")
            freqs[symbol] = float(value)
        return cls(freqs)

    def serialize(self) -> str:
        return "\n".join(f"{s} {float(f)!r}" for s, f in self._freqs.items()) + "\n"


# -- genotype data -------------------------------------------------------------


@dataclass(frozen=True)
class GenotypeData:
    """Unordered genotypes for the interest individuals at m sites.

    ``distances[t]`` is the genetic distance (Morgans) between sites t-1 and
    t; the leading entry is conventionally 0 and ignored.
    """

    ids: tuple[str, ...]
    sites: tuple[tuple[Optional[tuple[str, str]], ...], ...]
    distances: tuple[float, ...]

    def __post_init__(self):
        if len(self.distances) != len(self.sites):
            raise ValueError("one distance entry per site required (first is ignored)")
        for site in self.sites:
            if len(site) != len(self.ids):
                raise ValueError("every site must cover every individual")

    @property
    def m(self) -> int:
        return len(self.sites)

    def intervals(self) -> tuple[float, ...]:
        return self.distances[1:]

    def site_map(self, t: int) -> dict[str, Optional[tuple[str, str]]]:
        return dict(zip(self.ids, self.sites[t]))

    @classmethod
    def parse(cls, text: str) -> "GenotypeData":
        lines = [
            line.strip()
            for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")
        ]
        if not lines:
            raise ValueError("genotype file is empty")
        ids = tuple(lines[0].split())
        sites, distances = [], []
        for line_no, line in enumerate(lines[1:], start=2):
            tokens = line.split()
            if len(tokens) != len(ids) + 1:
                raise ValueError(
                    f"line {line_no}: expected distance plus {len(ids)} genotypes"
                )
            distance = float(tokens[0])
            if distance < 0:
                raise ValueError(f"line {line_no}: negative inter-site distance")
            row = []
            for tok in tokens[1:]:
                if tok == MISSING:
                    row.append(None)
                else:
                    a, sep, b = tok.partition("/")
                    if not sep or not a or not b:
                        raise ValueError(f"line {line_no}: bad genotype {tok!r}")
                    row.append(tuple(sorted((a, b))))
            sites.append(tuple(row))
            distances.append(distance)
        return cls(ids=ids, sites=tuple(sites), distances=tuple(distances))

    def serialize(self) -> str:
        lines = [" ".join(self.ids)]
        for dist, site in zip(self.distances, self.sites):
            row = [f"{dist!r}"]
            for g in site:
                row.append(MISSING if g is None else f"{g[0]}/{g[1]}")
            lines.append(" ".join(row))
        return "\n".join(lines) + "\n"


# -- emission probability -------------------------------------------------------


def signature_emission(
    signature: IBDSignature, site: SiteGenotypes, freqs: AlleleFrequencies
) -> Number:
    """Emission probability given only the IBD signature of the state.

    Sums the founder-frequency product over ordered versions of the
    unordered genotypes that are consistent with the component structure,
    weighted by 1/2^h where h counts observed heterozygous entries.
    Components without observed alleles marginalize to one; all-missing data
    therefore yields exactly 1.
    """
    observed = {
        ind: g for ind, g in site.items() if g is not None
    }
    for ind, g in observed.items():
        for allele in g:
            if allele not in freqs:
                raise KeyError(f"unknown allele symbol {allele!r}")
    if not observed:
        return 1
    het = [ind for ind, g in sorted(observed.items()) if g[0] != g[1]]
    orderings: dict[str, list[tuple[str, str]]] = {}
    for ind, g in observed.items():
        orderings[ind] = [g, (g[1], g[0])] if g[0] != g[1] else [g]
    blocks = [
        [label for label in block if label[0] in observed] for block in signature
    ]
    blocks = [b for b in blocks if b]
    total = 0
    for choice in itertools.product(*(orderings[ind] for ind in het)):
        ordered = dict(zip(het, choice))
        for ind, g in observed.items():
            if ind not in ordered:
                ordered[ind] = g
        term = 1
        for block in blocks:
            values = {
                ordered[ind][0 if side == PAT_SIDE else 1] for ind, side in block
            }
            if len(values) > 1:
                term = 0
                break
            term = term * freqs[next(iter(values))]
        total = total + term
    h = len(het)
    if isinstance(total, Fraction) or any(
        isinstance(f, Fraction) for _, f in freqs.items()
    ):
        return Fraction(total) / (1 << h)
    return total / (1 << h)


def emission_probability(
    ped: Pedigree, x: int, site: SiteGenotypes, freqs: AlleleFrequencies
) -> Number:
    """Probability of one site of genotype data given inheritance state x."""
    interest = set(ped.interest_ids())
    for ind, g in site.items():
        if g is not None and ind not in interest:
            raise PedigreeError(f"observed individual {ind!r} is not in the interest set")
    return signature_emission(ibd_signature(ped, x), site, freqs)


# -- proper automorphism search --------------------------------------------------


def _relevant_individuals(ped: Pedigree) -> set[str]:
    """Ids that carry indexed meioses, are of interest, or have descendants
    that do; only these constrain lineage swaps."""
    indexed_children = {m.child for m in ped.meioses}
    relevant = {i for i in ped.ids() if ped.individual(i).of_interest or i in indexed_children}
    for ind_id in reversed(ped.topo_order()):
        if ind_id in relevant:
            ind = ped.individual(ind_id)
            if not ind.is_founder:
                relevant.add(ind.father)
                relevant.add(ind.mother)
    return relevant


def _movable(ped: Pedigree, ind_id: str) -> bool:
    ind = ped.individual(ind_id)
    return not ind.of_interest and not ind.genotyped


def _sides_consistent(ped: Pedigree, ind_id: str) -> bool:
    pat = ped.has_meiosis(Meiosis(ind_id, PATERNAL))
    mat = ped.has_meiosis(Meiosis(ind_id, MATERNAL))
    return pat == mat


def _lineage_swap(ped: Pedigree, start: str, relevant: set[str]) -> Optional[dict]:
    """Search for the lexicographically first branch assignment making the
    maternal/paternal lineage swap at ``start`` a pedigree automorphism.

    Returns {'sigma': {id: id}, 'swap': {id: 0|1}} or None.
    """
    ind = ped.individual(start)
    father, mother = ind.father, ind.mother
    if father is None or father == mother:
        return None
    rel_children_f = sorted(c for c in ped.children_of(father) if c in relevant)
    rel_children_m = sorted(c for c in ped.children_of(mother) if c in relevant)
    if rel_children_f != rel_children_m or start not in rel_children_f:
        return None
    J = rel_children_f
    for j in J:
        sib = ped.individual(j)
        if (sib.father, sib.mother) != (father, mother):
            return None
        if not _sides_consistent(ped, j):
            return None

    sigma: dict[str, str] = {j: j for j in J}
    swap: dict[str, int] = {j: 1 for j in J}
    trail: list[str] = []

    def assign(u: str, v: str, s: int) -> None:
        sigma[u] = v
        swap[u] = s
        trail.append(u)
        if v != u:
            sigma[v] = u
            swap[v] = s
            trail.append(v)

    def undo_to(mark: int) -> None:
        while len(trail) > mark:
            key = trail.pop()
            del sigma[key], swap[key]

    def meioses_match(u: str, v: str, s: int) -> bool:
        for role in (PATERNAL, MATERNAL):
            target_role = role if s == 0 else (MATERNAL if role == PATERNAL else PATERNAL)
            if ped.has_meiosis(Meiosis(u, role)) != ped.has_meiosis(Meiosis(v, target_role)):
                return False
        return True

    def pair(u: str, v: str, child_u: Optional[str], child_v: Optional[str]) -> bool:
        """Extend sigma with sigma(u)=v, trying straight orientation first."""
        if u in sigma or v in sigma:
            return sigma.get(u) == v and sigma.get(v) == u
        iu, iv = ped.individual(u), ped.individual(v)
        if u == v:
            # Shared ancestor; fixing everything above it is always valid,
            # and 0-first enumeration means the swap branch is never needed.
            assign(u, u, 0)
            return True
        if not (_movable(ped, u) and _movable(ped, v)):
            return False
        if iu.is_founder != iv.is_founder:
            return False
        if child_u is not None:
            if sorted(c for c in ped.children_of(u) if c in relevant) != [child_u]:
                return False
            if sorted(c for c in ped.children_of(v) if c in relevant) != [child_v]:
                return False
        for s in (0, 1):
            if not meioses_match(u, v, s):
                continue
            mark = len(trail)
            assign(u, v, s)
            if iu.is_founder:
                return True
            if s == 0:
                ok = pair(iu.father, iv.father, u, v) and pair(iu.mother, iv.mother, u, v)
            else:
                ok = pair(iu.father, iv.mother, u, v) and pair(iu.mother, iv.father, u, v)
            if ok:
                return True
            undo_to(mark)
        return False

    if pair(father, mother, None, None):
        return {"sigma": sigma, "swap": swap}
    return None


def _swap_to_isometry(ped: Pedigree, sigma: dict[str, str], swap: dict[str, int]) -> Optional[Isometry]:
    n = ped.n
    perm = [0] * n
    switch = 0
    for j, m in enumerate(ped.meioses):
        child = sigma.get(m.child, m.child)
        s_child = swap.get(m.child, 0)
        role = m.role if s_child == 0 else (MATERNAL if m.role == PATERNAL else PATERNAL)
        target = Meiosis(child, role)
        if not ped.has_meiosis(target):
            return None
        perm[j] = ped.meiosis_index(target)
        if swap.get(ped.parent_of_meiosis(m), 0):
            switch |= 1 << (n - 1 - j)
    return Isometry(n, tuple(perm), switch)


def proper_automorphisms(ped: Pedigree) -> tuple[Isometry, ...]:
    """Lineage-swapping pedigree automorphisms as state-space isometries.

    For every eligible individual (interest individuals whose parents are
    outside the interest set, plus non-interest non-founders) the search
    swaps its paternal and maternal lineages, enumerating the left/right
    orientation indicator at each ancestral branch point in lexicographic
    order and keeping the first assignment that extends to a full
    automorphism.  Every moved individual must be ungenotyped and outside
    the interest set.  The empty tuple is a valid result.
    """
    interest = set(ped.interest_ids())
    relevant = _relevant_individuals(ped)
    found: list[Isometry] = []
    seen: set[Isometry] = set()
    for ind_id in sorted(ped.individuals):
        ind = ped.individual(ind_id)
        if ind.is_founder:
            continue
        if ind_id in interest and (ind.father in interest or ind.mother in interest):
            continue  # swapping would have to move a genotyped parent
        result = _lineage_swap(ped, ind_id, relevant)
        if result is None:
            continue
        iso = _swap_to_isometry(ped, result["sigma"], result["swap"])
        if iso is None or iso.is_identity or iso in seen:
            continue
        seen.add(iso)
        found.append(iso)
    return tuple(sorted(found, key=lambda t: (t.perm, t.switch)))


def emission_partition(ped: Pedigree, cap: int = DEFAULT_MEIOSIS_CAP) -> Partition:
    """Orbits of the proper automorphisms acting on the identity states.

    Data-independent: two states land in one block exactly when they emit
    every possible observation with equal probability.
    """
    base = identity_states(ped, cap=cap)
    gens = proper_automorphisms(ped)
    return orbits_on_blocks(gens, base)
