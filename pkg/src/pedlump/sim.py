"""Wright-Fisher pedigree simulation with monogamy, the half-sibling
perturbation, and genotype simulation along a genome.

Generations have a fixed size: per-couple offspring counts are Poisson
draws conditioned on the generation total, which makes the allocation
multinomial over couples.  The conditioning is what keeps simulated
pedigrees inside the meiosis caps of the reduction algorithms; it is
recorded in the metadata of every simulation run.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ._bits import get_bit
from .emission import AlleleFrequencies, GenotypeData
from .inheritance import MAT_SIDE, PAT_SIDE, _founder_origin
from .pedigree import FEMALE, MALE, Individual, Pedigree, PedigreeError

OFFSPRING_MODEL = "poisson-conditioned-fixed-generation-size"


def simulate_pedigree(
    generations: int,
    per_gen_n: int,
    offspring_mean: float,
    halfsib: bool = False,
    seed: int | Sequence[int] = 0,
) -> Pedigree:
    """Simulate a monogamous Wright-Fisher pedigree.

    Every generation holds exactly ``per_gen_n`` individuals with balanced
    sexes; random male-female couples receive the next generation's children
    by conditioned-Poisson (multinomial) allocation.  With ``halfsib`` each
    child-parent edge is independently rewired with probability 0.5 to a
    uniformly drawn same-sex parent of the same generation, which breaks
    monogamy and creates half-siblings.  The individuals of interest are the
    extant ones: out-degree zero after any rewiring.  Deterministic given
    ``seed``.
    """
    if generations < 2:
        raise ValueError("need at least 2 generations")
    if per_gen_n < 2:
        raise ValueError("need at least 2 individuals per generation")
    if offspring_mean <= 0:
        raise ValueError("offspring mean must be positive")
    rng = np.random.default_rng(seed)

    def make_id(gen: int, idx: int) -> str:
        return f"g{gen}i{idx:02d}"

    sexes = {}
    parents: dict[str, tuple[Optional[str], Optional[str]]] = {}
    by_gen: list[list[str]] = []
    for gen in range(generations):
        ids = [make_id(gen, i) for i in range(per_gen_n)]
        for i, ind_id in enumerate(ids):
            sexes[ind_id] = MALE if i % 2 == 0 else FEMALE
        by_gen.append(ids)
        if gen == 0:
            for ind_id in ids:
                parents[ind_id] = (None, None)
            continue
        prev = by_gen[gen - 1]
        males = [i for i in prev if sexes[i] == MALE]
        females = [i for i in prev if sexes[i] == FEMALE]
        rng.shuffle(males)
        rng.shuffle(females)
        couples = list(zip(males, females))
        if not couples:
            raise PedigreeError(f"generation {gen - 1} has no possible couples")
        counts = rng.multinomial(per_gen_n, [1.0 / len(couples)] * len(couples))
        child_iter = iter(ids)
        for (father, mother), count in zip(couples, counts):
            for _ in range(count):
                parents[next(child_iter)] = (father, mother)

    if halfsib:
        gen_of = {i: g for g, ids in enumerate(by_gen) for i in ids}
        for gen_ids in by_gen[1:]:
            for child in gen_ids:
                father, mother = parents[child]
                new_parents = []
                for parent, sex in ((father, MALE), (mother, FEMALE)):
                    if rng.random() < 0.5:
                        pool = [i for i in by_gen[gen_of[parent]] if sexes[i] == sex]
                        parent = pool[rng.integers(len(pool))]
                    new_parents.append(parent)
                parents[child] = (new_parents[0], new_parents[1])

    has_children = {p for pair in parents.values() for p in pair if p is not None}
    individuals = []
    for gen_ids in by_gen:
        for ind_id in gen_ids:
            father, mother = parents[ind_id]
            extant = ind_id not in has_children
            individuals.append(
                Individual(
                    id=ind_id,
                    father=father,
                    mother=mother,
                    sex=sexes[ind_id],
                    genotyped=extant,
                    of_interest=extant,
                )
            )
    ped = Pedigree(individuals, [])
    return ped.with_meioses(ped.all_edges())


def simulate_genotypes(
    ped: Pedigree,
    m: int,
    distances: Sequence[float],
    freqs: AlleleFrequencies,
    rate: float = 1.0,
    seed: int | Sequence[int] = 0,
) -> tuple[GenotypeData, tuple[int, ...]]:
    """Simulate genotypes for the interest individuals along ``m`` sites.

    The inheritance path starts uniform on the hypercube and flips each
    meiosis bit independently with the interval's recombination fraction.
    Founder allele values are drawn i.i.d. per founder allele node per site
    (linkage-equilibrium founders); observed genotypes are the unordered
    allele pairs of the interest individuals.  Returns the data and the true
    inheritance path.  Deterministic given ``seed``.
    """
    from .hmm import theta_from_distance

    if m < 1:
        raise ValueError("need at least one site")
    if len(distances) != m - 1:
        raise ValueError(f"need {m - 1} inter-site distances, got {len(distances)}")
    for d in distances:
        if d < 0:
            raise ValueError("negative inter-site distance")
    rng = np.random.default_rng(seed)
    n = ped.n
    interest = ped.interest_ids()
    if not interest:
        raise PedigreeError("interest set is empty")

    path = [int(rng.integers(0, 1 << n))] if n else [0]
    for d in distances:
        theta = theta_from_distance(d, rate)
        flips = rng.random(n) < theta if n else np.zeros(0, dtype=bool)
        delta = 0
        for j in range(n):
            if flips[j]:
                delta |= 1 << (n - 1 - j)
        path.append(path[-1] ^ delta)

    founder_nodes = [
        (f, side) for f in sorted(ped.founders()) for side in (PAT_SIDE, MAT_SIDE)
    ]
    symbols = freqs.symbols()
    probs = np.array([float(f) for _, f in freqs.items()])
    probs = probs / probs.sum()

    sites = []
    for t in range(m):
        draws = rng.choice(len(symbols), size=len(founder_nodes), p=probs)
        values = {node: symbols[d] for node, d in zip(founder_nodes, draws)}
        row = []
        for ind in interest:
            a = values[_founder_origin(ped, path[t], (ind, PAT_SIDE))]
            b = values[_founder_origin(ped, path[t], (ind, MAT_SIDE))]
            row.append(tuple(sorted((a, b))))
        sites.append(tuple(row))

    data = GenotypeData(
        ids=interest,
        sites=tuple(sites),
        distances=(0.0,) + tuple(float(d) for d in distances),
    )
    return data, tuple(path)
