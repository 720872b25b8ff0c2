import numpy as np
import pytest

import pedlump as pl

from conftest import random_pruned_pedigrees


def preserves_blocks_setwise(partition, isometry):
    image = partition.block_of[isometry.state_map]
    pairs = np.unique(np.stack([partition.block_of, image]), axis=1)
    return pairs.shape[1] == partition.num_blocks


class TestFounderIsometries:
    def test_fullsib_switches(self, fullsib):
        switches = {t.to_text() for t in pl.founder_isometries(fullsib)}
        assert switches == {"perm=() switch=1010", "perm=() switch=0101"}

    def test_genotyped_founder_contributes_nothing(self):
        text = """\
f 0 0 M 1 0
m 0 0 F 0 0
c1 f m M 1 1
c2 f m F 1 1
"""
        ped = pl.parse_pedigree(text)
        switches = {t.switch for t in pl.founder_isometries(ped)}
        assert switches == {0b0101}  # only the mother's switch remains

    def test_halfcousins_shared_grandparent(self, halfcousins):
        # only gm keeps indexed meioses after pruning: bits 2 and 3
        switches = {t.to_text() for t in pl.founder_isometries(halfcousins)}
        assert switches == {"perm=() switch=0110"}

    def test_every_switch_preserves_identity_states(self):
        for ped in random_pruned_pedigrees(5, 12, tag=71):
            ident = pl.identity_states(ped)
            for t in pl.founder_isometries(ped):
                assert preserves_blocks_setwise(ident, t)


class TestChainIsometries:
    def test_three_deep_lineage(self, chain3):
        chains = pl.chain_isometries(chain3)
        assert [t.to_text() for t in chains] == ["perm=(1 3 5) switch=000000000000"]

    def test_length_one_lineage_skipped(self):
        text = """\
a0 0 0 M 0 0
b0 0 0 F 0 0
s3 0 0 F 0 0
L1 a0 b0 M 0 0
k1 L1 s3 M 1 1
k2 L1 s3 F 1 1
"""
        assert pl.chain_isometries(pl.parse_pedigree(text)) == ()

    def test_genotyped_intermediate_excluded(self, chain3):
        text = pl.serialize_pedigree(chain3).replace("L2 L1 s1 M 0 0", "L2 L1 s1 M 1 0")
        assert pl.chain_isometries(pl.parse_pedigree(text)) == ()

    def test_chain_preserves_identity_states(self, chain3):
        ident = pl.identity_states(chain3)
        for t in pl.chain_isometries(chain3):
            assert preserves_blocks_setwise(ident, t)


class TestCoupleIsometries:
    def test_fullsib_pair(self, fullsib):
        couples = [t.to_text() for t in pl.couple_isometries(fullsib)]
        assert couples == ["perm=(1 2)(3 4) switch=0000"]

    def test_genotyped_member_excluded(self):
        text = """\
f 0 0 M 0 0
m 0 0 F 1 0
c1 f m M 1 1
c2 f m F 1 1
"""
        assert pl.couple_isometries(pl.parse_pedigree(text)) == ()

    def test_polygamous_founder_excluded(self):
        text = """\
f 0 0 M 0 0
m1 0 0 F 0 0
m2 0 0 F 0 0
c1 f m1 M 1 1
c2 f m2 F 1 1
"""
        assert pl.couple_isometries(pl.parse_pedigree(text)) == ()

    def test_grandchildren_get_correction_switch(self):
        # founder couple whose children have children: the swap must XOR the
        # meioses sourced at the children to stay an automorphism
        text = """\
f 0 0 M 0 0
m 0 0 F 0 0
s1 0 0 F 0 0
s2 0 0 F 0 0
a f m M 0 0
b f m M 0 0
ga a s1 M 1 1
gb b s2 M 1 1
"""
        ped = pl.parse_pedigree(text)
        couples = pl.couple_isometries(ped)
        assert len(couples) == 1
        t = couples[0]
        idx = {mm.token(): j for j, mm in enumerate(ped.meioses)}
        assert t.perm[idx["a:pat"]] == idx["a:mat"]
        # the grandchild meioses from a and b carry switch bits
        n = ped.n
        for tok in ("ga:pat", "gb:pat"):
            assert (t.switch >> (n - 1 - idx[tok])) & 1 == 1
        ident = pl.identity_states(ped)
        assert preserves_blocks_setwise(ident, t)

    def test_couples_preserve_identity_states(self):
        for ped in random_pruned_pedigrees(5, 12, tag=72):
            ident = pl.identity_states(ped)
            for t in pl.couple_isometries(ped):
                assert preserves_blocks_setwise(ident, t)


class TestKnownIsometries:
    def test_deduplicated_with_proper_automorphisms(self, fullsib):
        known = pl.known_isometries(fullsib)
        assert len(known) == len(set(known))
        couple = pl.couple_isometries(fullsib)[0]
        autos = pl.proper_automorphisms(fullsib)
        assert couple in known and couple in autos


class TestBootstrapMaximumEnsemble:
    def test_halfcousins_matches_full(self, halfcousins):
        E = pl.emission_partition(halfcousins)
        full = pl.maximum_ensemble(E)
        stats = pl.BootstrapStats()
        boot = pl.bootstrap_maximum_ensemble(
            halfcousins, E, pl.known_isometries(halfcousins), stats=stats
        )
        assert boot == full
        assert stats.orbit_count < 16

    def test_empty_generators_degenerate(self, halfcousins):
        E = pl.emission_partition(halfcousins)
        assert pl.bootstrap_maximum_ensemble(halfcousins, E, []) == pl.maximum_ensemble(E)

    def test_fullsib_three_blocks_with_fewer_representatives(self, fullsib):
        E = pl.emission_partition(fullsib)
        stats = pl.BootstrapStats()
        boot = pl.bootstrap_maximum_ensemble(
            fullsib, E, pl.known_isometries(fullsib), stats=stats
        )
        assert boot == E and boot.num_blocks == 3
        assert stats.orbit_count < 16

    def test_generator_violating_emission_rejected(self, halfcousins):
        E = pl.emission_partition(halfcousins)
        bad = pl.Isometry.from_cycles(4, [(1, 2)])  # merges IBD with non-IBD states
        with pytest.raises(pl.GeneratorError, match="respect"):
            pl.bootstrap_maximum_ensemble(halfcousins, E, [bad])

    def test_width_mismatch_rejected(self, halfcousins):
        E = pl.emission_partition(halfcousins)
        with pytest.raises(pl.GeneratorError, match="width"):
            pl.bootstrap_maximum_ensemble(halfcousins, E, [pl.Isometry.identity(3)])

    def test_matches_full_on_random_pedigrees(self):
        for ped in random_pruned_pedigrees(8, 12, tag=73):
            E = pl.emission_partition(ped)
            full = pl.maximum_ensemble(E)
            boot = pl.bootstrap_maximum_ensemble(ped, E, pl.known_isometries(ped))
            assert boot == full

    def test_refinement_ops_scale_with_k(self):
        for ped in random_pruned_pedigrees(3, 12, tag=74, min_n=6):
            E = pl.emission_partition(ped)
            stats = pl.BootstrapStats()
            pl.bootstrap_maximum_ensemble(ped, E, pl.known_isometries(ped), stats=stats)
            assert stats.orbit_count <= 1 << ped.n
            assert stats.refinement_ops <= stats.passes * stats.orbit_count * (1 << ped.n)
