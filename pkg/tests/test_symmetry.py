import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pedlump as pl
from pedlump._bits import popcount


def random_isometry(rng, n):
    perm = tuple(int(p) for p in rng.permutation(n))
    return pl.Isometry(n, perm, int(rng.integers(0, 1 << n)))


@st.composite
def isometries(draw, n):
    perm = tuple(draw(st.permutations(range(n))))
    switch = draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    return pl.Isometry(n, perm, switch)


class TestApply:
    def test_switch_only(self):
        t = pl.Isometry.from_switch(4, 0b0110)
        assert t.apply(0b0000) == 0b0110

    def test_transposition_only(self):
        t = pl.Isometry.from_cycles(4, [(1, 4)])
        assert t.apply(0b1000) == 0b0001

    def test_composed_clause(self):
        switch = pl.Isometry.from_switch(4, 0b0110)
        perm = pl.Isometry.from_cycles(4, [(1, 4)])
        t = pl.compose(perm, switch)
        x = 0b1001
        assert t.apply(x) == perm.apply(switch.apply(x))

    def test_width_check(self):
        t = pl.Isometry.identity(3)
        with pytest.raises(ValueError, match="range"):
            t.apply(8)

    def test_state_map_matches_apply(self):
        rng = np.random.default_rng(5)
        for n in (1, 3, 5):
            t = random_isometry(rng, n)
            assert all(t.state_map[x] == t.apply(x) for x in range(1 << n))


class TestCompose:
    def test_identity_laws(self):
        t = pl.Isometry.from_cycles(4, [(1, 2, 3)], 0b1010)
        e = pl.Isometry.identity(4)
        assert pl.compose(e, t) == t
        assert pl.compose(t, e) == t

    def test_switch_involution(self):
        t = pl.Isometry.from_switch(4, 0b1011)
        assert pl.compose(t, t).is_identity

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="width"):
            pl.compose(pl.Isometry.identity(3), pl.Isometry.identity(4))

    @settings(max_examples=60, deadline=None)
    @given(isometries(4), isometries(4))
    def test_action_equality_pointwise(self, t1, t2):
        c = pl.compose(t1, t2)
        for x in range(16):
            assert c.apply(x) == t1.apply(t2.apply(x))

    def test_inverse(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            t = random_isometry(rng, 5)
            assert pl.compose(t, t.inverse()).is_identity
            assert pl.compose(t.inverse(), t).is_identity


class TestIsometryProperties:
    @settings(max_examples=40, deadline=None)
    @given(isometries(5))
    def test_bijection(self, t):
        assert len({t.apply(x) for x in range(32)}) == 32

    def test_distance_preservation_up_to_n12(self):
        rng = np.random.default_rng(7)
        for n in (4, 8, 12):
            t = random_isometry(rng, n)
            xs = rng.integers(0, 1 << n, size=200)
            ys = rng.integers(0, 1 << n, size=200)
            tm = t.state_map
            for x, y in zip(xs, ys):
                assert popcount(int(tm[x]) ^ int(tm[y])) == popcount(int(x ^ y))


class TestOrbits:
    def test_halfcousins_generators_give_published_blocks(self):
        gens = [
            pl.Isometry.from_cycles(4, [(1, 4)]),
            pl.Isometry.from_cycles(4, [(2, 3)]),
            pl.Isometry.from_switch(4, 0b0110),
        ]
        part = pl.orbits(gens, 4)
        blocks = {tuple(map(int, b)) for b in part.blocks()}
        assert blocks == {
            (0b1001, 0b1111),
            (0b0010, 0b0100),
            (0b1011, 0b1101),
            (0b0000, 0b0110),
            (0b0011, 0b0101, 0b1010, 0b1100),
            (0b0001, 0b0111, 0b1000, 0b1110),
        }

    def test_empty_generators_singletons(self):
        assert pl.orbits([], 3) == pl.Partition.singletons(3)

    def test_complement_switch_pairs(self):
        part = pl.orbits([pl.Isometry.from_switch(4, 0b1111)], 4)
        assert part.num_blocks == 8
        for b in part.blocks():
            assert len(b) == 2 and int(b[0]) ^ int(b[1]) == 0b1111

    def test_orbits_partition_valid(self):
        rng = np.random.default_rng(8)
        gens = [random_isometry(rng, 6) for _ in range(3)]
        part = pl.orbits(gens, 6)
        assert sorted(np.concatenate(part.blocks())) == list(range(64))

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="width"):
            pl.orbits([pl.Isometry.identity(3)], 4)


class TestOrbitsOnBlocks:
    def test_fullsib_parent_swap_merges_middle_classes(self, fullsib):
        ident = pl.identity_states(fullsib)
        swap = pl.Isometry.from_cycles(4, [(1, 2), (3, 4)])
        merged = pl.orbits_on_blocks([swap], ident)
        blocks = {tuple(map(int, b)) for b in merged.blocks()}
        assert blocks == {
            (0b0000, 0b0101, 0b1010, 0b1111),
            (0b0001, 0b0010, 0b0100, 0b0111, 0b1000, 0b1011, 0b1101, 0b1110),
            (0b0011, 0b0110, 0b1001, 0b1100),
        }

    def test_empty_generators_unchanged(self, fullsib):
        ident = pl.identity_states(fullsib)
        assert pl.orbits_on_blocks([], ident) == ident

    def test_blockwise_fixing_generators_unchanged(self):
        six = pl.Partition.from_blocks(
            4,
            [
                [0b1001, 0b1111],
                [0b0010, 0b0100],
                [0b1011, 0b1101],
                [0b0000, 0b0110],
                [0b0011, 0b0101, 0b1010, 0b1100],
                [0b0001, 0b0111, 0b1000, 0b1110],
            ],
        )
        assert pl.orbits_on_blocks([pl.Isometry.from_switch(4, 0b0110)], six) == six


class TestTextForm:
    def test_roundtrip(self):
        t = pl.Isometry.from_cycles(4, [(1, 4), (2, 3)], 0b0110)
        assert t.to_text() == "perm=(1 4)(2 3) switch=0110"
        assert pl.Isometry.from_text(t.to_text(), 4) == t

    def test_identity_form(self):
        assert pl.Isometry.identity(4).to_text() == "perm=() switch=0000"

    def test_bad_text(self):
        with pytest.raises(ValueError):
            pl.Isometry.from_text("nonsense", 4)
        with pytest.raises(ValueError, match="width"):
            pl.Isometry.from_text("perm=() switch=01", 4)

    def test_cycle_errors(self):
        with pytest.raises(ValueError, match="range"):
            pl.Isometry.from_cycles(3, [(1, 4)])
        with pytest.raises(ValueError, match="two cycles"):
            pl.Isometry.from_cycles(4, [(1, 2), (2, 3)])
