import numpy as np
import pytest

import pedlump as pl

# Two untyped founder parents, two genotyped children of interest (n=4).
FULLSIB_TEXT = """\
f 0 0 M 0 0
m 0 0 F 0 0
c1 f m M 1 1
c2 f m F 1 1
"""

# Half-cousins A and D with one shared grandmother gm; their mothers B and C
# are half-siblings; fathers f1/f2/s1/s2 are unrelated founders.  Ids are
# chosen so the default meiosis order of the pruned pedigree reproduces the
# published 4-bit labels (A:mat, B:mat, C:mat, D:mat).
HALFCOUSINS_TEXT = """\
gm 0 0 F 0 0
f1 0 0 M 0 0
f2 0 0 M 0 0
s1 0 0 M 0 0
s2 0 0 M 0 0
B f1 gm F 0 0
C f2 gm F 0 0
A s1 B F 1 1
D s2 C F 1 1
"""

TRIO_TEXT = """\
f 0 0 M 0 0
m 0 0 F 0 0
c f m M 1 1
"""

# Three-member ungenotyped single-child lineage L1->L2->L3 above a nuclear
# family; every founder alongside the lineage has exactly one child.
CHAIN3_TEXT = """\
a0 0 0 M 0 0
b0 0 0 F 0 0
s1 0 0 F 0 0
s2 0 0 F 0 0
s3 0 0 F 0 0
s4 0 0 F 0 0
L1 a0 b0 M 0 0
L2 L1 s1 M 0 0
L3 L2 s2 M 0 0
k1 L3 s3 M 0 0
k2 k1 s4 M 1 1
k3 k1 s4 F 1 1
"""

# The six blocks of the half-cousins minimal partition, canonical form.
HALFCOUSINS_PARTITION = """\
0000 0110
0001 0111 1000 1110
0010 0100
0011 0101 1010 1100
1001 1111
1011 1101
"""

# Full-sib emission partition: D_0000, D_1000 u D_0100, D_1100.
FULLSIB_PARTITION = """\
0000 0101 1010 1111
0001 0010 0100 0111 1000 1011 1101 1110
0011 0110 1001 1100
"""


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # First use of the histogram kernels pays numba compilation; do it once
    # so timed tests measure the algorithms.
    E = pl.Partition(2, np.array([0, 0, 1, 1]))
    pl.maximum_ensemble(E)
    ped = pl.parse_pedigree(FULLSIB_TEXT)
    pl.bootstrap_maximum_ensemble(ped, pl.emission_partition(ped), pl.known_isometries(ped))


@pytest.fixture
def fullsib():
    return pl.parse_pedigree(FULLSIB_TEXT)


@pytest.fixture
def halfcousins_full():
    return pl.parse_pedigree(HALFCOUSINS_TEXT)


@pytest.fixture
def halfcousins(halfcousins_full):
    return pl.prune_irrelevant(halfcousins_full)


@pytest.fixture
def trio():
    return pl.parse_pedigree(TRIO_TEXT)


@pytest.fixture
def chain3():
    return pl.parse_pedigree(CHAIN3_TEXT)


def random_two_generation(seed: int, max_children: int = 6) -> pl.Pedigree:
    """Seeded random two-generation pedigree: untyped founders, genotyped
    children of interest, with occasional shared parents (half-sibs)."""
    rng = np.random.default_rng((101, seed))
    n_children = int(rng.integers(2, max_children + 1))
    n_fathers = int(rng.integers(1, 4))
    n_mothers = int(rng.integers(1, 4))
    lines = []
    for i in range(n_fathers):
        lines.append(f"f{i} 0 0 M 0 0")
    for i in range(n_mothers):
        lines.append(f"m{i} 0 0 F 0 0")
    for c in range(n_children):
        fa = int(rng.integers(n_fathers))
        mo = int(rng.integers(n_mothers))
        lines.append(f"c{c} f{fa} m{mo} {'M' if rng.random() < 0.5 else 'F'} 1 1")
    return pl.parse_pedigree("\n".join(lines) + "\n")


def random_pruned_pedigrees(count: int, max_n: int, *, tag: int = 7001, min_n: int = 2):
    """Deterministic stream of simulated, pruned pedigrees with n <= max_n."""
    configs = [(2, 3), (2, 4), (2, 5), (2, 6), (3, 3), (3, 4), (4, 2)]
    out = []
    seed = 0
    while len(out) < count:
        gens, npg = configs[seed % len(configs)]
        ped = pl.simulate_pedigree(
            gens, npg, 2.0, halfsib=(seed % 2 == 0), seed=(tag, seed)
        )
        seed += 1
        try:
            pruned = pl.prune_irrelevant(ped, cap=max(20, ped.n))
        except pl.MeiosisCapError:
            continue
        if min_n <= pruned.n <= max_n:
            out.append(pruned)
    return out
