import numpy as np
import pytest

import pedlump as pl
from pedlump.ensemble import bipartition

from conftest import HALFCOUSINS_PARTITION, random_pruned_pedigrees

SIX_BLOCKS = [
    [0b1001, 0b1111],
    [0b0010, 0b0100],
    [0b1011, 0b1101],
    [0b0000, 0b0110],
    [0b0011, 0b0101, 0b1010, 0b1100],
    [0b0001, 0b0111, 0b1000, 0b1110],
]


@pytest.fixture
def six_block():
    return pl.Partition.from_blocks(4, SIX_BLOCKS)


@pytest.fixture
def halfcousins_emission(halfcousins):
    return pl.emission_partition(halfcousins)


class TestCoefficientVector:
    def test_published_values(self):
        assert pl.coefficient_vector(0b0001, [0b1001, 0b1111], 4) == (0, 1, 0, 1, 0)
        assert pl.coefficient_vector(0b0011, [0b1001, 0b1111], 4) == (0, 0, 2, 0, 0)

    def test_self_block(self):
        assert pl.coefficient_vector(0b0101, [0b0101], 4) == (1, 0, 0, 0, 0)

    def test_counts_sum_to_block_size(self):
        rng = np.random.default_rng(1)
        members = rng.choice(64, size=20, replace=False)
        vec = pl.coefficient_vector(int(rng.integers(64)), members, 6)
        assert sum(vec) == 20 and all(c >= 0 for c in vec)

    def test_range_checks(self):
        with pytest.raises(ValueError, match="range"):
            pl.coefficient_vector(16, [0], 4)
        with pytest.raises(ValueError, match="range"):
            pl.coefficient_vector(0, [16], 4)


class TestBipartition:
    def test_markov_partition_unchanged(self, six_block):
        assert bipartition(six_block) is six_block

    def test_emission_partition_splits(self, halfcousins_emission):
        # One binary pass peels the anchor class; the violating pair 0001 vs
        # 0011 lands in separate blocks once the refinement reaches fixpoint.
        refined = bipartition(halfcousins_emission)
        assert refined.num_blocks > 2
        assert pl.verify_refines(refined, halfcousins_emission)
        final = pl.maximum_ensemble(halfcousins_emission)
        assert final.block_of[0b0001] != final.block_of[0b0011]

    def test_singletons_unchanged(self):
        s = pl.Partition.singletons(4)
        assert bipartition(s) is s

    def test_result_refines_input(self, halfcousins_emission):
        refined = bipartition(halfcousins_emission)
        assert pl.verify_refines(refined, halfcousins_emission)


class TestMaximumEnsemble:
    def test_halfcousins_exact(self, halfcousins_emission, six_block):
        assert pl.maximum_ensemble(halfcousins_emission) == six_block

    def test_fullsib_emission_already_markov(self, fullsib):
        E = pl.emission_partition(fullsib)
        assert pl.maximum_ensemble(E) == E

    def test_singletons_fixed(self):
        s = pl.Partition.singletons(5)
        assert pl.maximum_ensemble(s) == s

    def test_whole_space_fixed(self):
        t = pl.Partition.trivial(4)
        assert pl.maximum_ensemble(t) == t

    def test_fixpoint_stability(self, halfcousins_emission):
        P = pl.maximum_ensemble(halfcousins_emission)
        assert bipartition(P) is P

    def test_result_is_markov_and_refines(self, halfcousins_emission):
        P = pl.maximum_ensemble(halfcousins_emission)
        ok, _ = pl.verify_markov(P)
        assert ok
        assert pl.verify_refines(P, halfcousins_emission)

    def test_subdivision_persistence(self):
        """A violating pair always ends up separated in the fixpoint."""
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(3, 7))
            labels = rng.integers(0, int(rng.integers(1, 4)), size=1 << n)
            E = pl.Partition(n, labels)
            ok, witness = pl.verify_markov(E)
            if ok:
                continue
            P = pl.maximum_ensemble(E)
            assert P.block_of[witness.x1] != P.block_of[witness.x2]

    def test_loop_invariant_finalized_never_resplit(self, halfcousins_emission):
        _, stats = pl.maximum_ensemble(halfcousins_emission, return_stats=True)
        for t, finalized in enumerate(stats.finalized_per_pass[:-1]):
            later = stats.partitions[t + 1 :] + [stats.partitions[-1]]
            for part in later:
                for block in finalized:
                    ids = {int(part.block_of[x]) for x in block}
                    assert len(ids) == 1, "a finalized block was resplit"

    def test_loop_invariant_on_random_pedigrees(self):
        for ped in random_pruned_pedigrees(4, 10, tag=61):
            E = pl.emission_partition(ped)
            P, stats = pl.maximum_ensemble(E, return_stats=True)
            final_blocks = {frozenset(map(int, b)) for b in P.blocks()}
            for finalized in stats.finalized_per_pass:
                for block in finalized:
                    assert block in final_blocks

    def test_matches_iterated_bipartition(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            labels = rng.integers(0, 3, size=1 << n)
            E = pl.Partition(n, labels)
            P = pl.maximum_ensemble(E)
            cur = E
            for _ in range((1 << n) + 1):
                nxt = bipartition(cur)
                if nxt is cur:
                    break
                cur = nxt
            assert P == cur

    def test_order_invariance(self, halfcousins_emission):
        expected = pl.maximum_ensemble(halfcousins_emission).serialize()
        rng = np.random.default_rng(4)
        blocks = [list(map(int, b)) for b in halfcousins_emission.blocks()]
        for _ in range(20):
            shuffled = [list(b) for b in blocks]
            for b in shuffled:
                rng.shuffle(b)
            rng.shuffle(shuffled)
            E = pl.Partition.from_blocks(4, shuffled)
            assert pl.maximum_ensemble(E).serialize() == expected


class TestVerifyMarkov:
    def test_six_block_true(self, six_block):
        ok, witness = pl.verify_markov(six_block)
        assert ok and witness is None

    def test_emission_witness_pinned(self, halfcousins_emission):
        ok, witness = pl.verify_markov(halfcousins_emission)
        assert not ok
        assert (witness.x1, witness.x2) == (0b0001, 0b0011)
        assert set(witness.block) == {0b1001, 0b1111}
        assert witness.vector1 == (0, 1, 0, 1, 0)
        assert witness.vector2 == (0, 0, 2, 0, 0)

    def test_singletons_true(self):
        ok, _ = pl.verify_markov(pl.Partition.singletons(3))
        assert ok

    def test_witness_vectors_really_differ(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            labels = rng.integers(0, 2, size=1 << n)
            P = pl.Partition(n, labels)
            ok, witness = pl.verify_markov(P)
            if ok:
                continue
            assert witness.vector1 != witness.vector2
            assert P.block_of[witness.x1] == P.block_of[witness.x2]
            assert witness.vector1 == pl.coefficient_vector(witness.x1, witness.block, n)
            assert witness.vector2 == pl.coefficient_vector(witness.x2, witness.block, n)


class TestVerifyRefines:
    def test_output_refines_emission(self, halfcousins_emission):
        P = pl.maximum_ensemble(halfcousins_emission)
        assert pl.verify_refines(P, halfcousins_emission)

    def test_identity_refines_emission_not_conversely(self, fullsib):
        ident = pl.identity_states(fullsib)
        E = pl.emission_partition(fullsib)
        assert pl.verify_refines(ident, E)
        assert not pl.verify_refines(E, ident)

    def test_reflexive(self, six_block):
        assert pl.verify_refines(six_block, six_block)

    def test_ground_set_mismatch(self):
        with pytest.raises(ValueError, match="ground"):
            pl.verify_refines(pl.Partition.singletons(2), pl.Partition.singletons(3))


class TestGroupCrossCheck:
    def test_halfcousins_orbits_equal_maximum_ensemble(self, halfcousins_emission):
        gens = [
            pl.Isometry.from_cycles(4, [(1, 4)]),
            pl.Isometry.from_cycles(4, [(2, 3)]),
            pl.Isometry.from_switch(4, 0b0110),
        ]
        assert pl.orbits(gens, 4) == pl.maximum_ensemble(halfcousins_emission)

    def test_partition_file_matches(self, halfcousins_emission):
        P = pl.maximum_ensemble(halfcousins_emission)
        assert P.serialize() == HALFCOUSINS_PARTITION
