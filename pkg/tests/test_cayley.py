"""Ball enumeration, growth tables, and distortion."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.cayley import (
    Ball,
    distortion,
    enumerate_ball,
    growth_sequence,
    relative_ball,
    submultiplicativity_violations,
    subgroup_word_length,
)
from growthlab.errors import BallBudgetError, SearchDepthError
from growthlab.subgroups import CyclicOracle, StallingsOracle, diagonal_oracle, parse_subgroup
from growthlab.words import Element, free_group, parse_element, product_group

F1 = free_group(1)
F2 = free_group(2)
F2xF2 = product_group(2, 2)


def el(text, group=F2):
    return parse_element(group, text)


class TestEnumerateBall:
    def test_free_rank_two_counts(self):
        ball = enumerate_ball(F2, 5)
        assert ball.counts_by_radius == (1, 5, 17, 53, 161, 485)

    def test_rank_one_counts(self):
        ball = enumerate_ball(F1, 6)
        assert ball.counts_by_radius == (1, 3, 5, 7, 9, 11, 13)

    def test_sphere_counts(self):
        ball = enumerate_ball(F2, 4)
        assert ball.sphere_counts() == (1, 4, 12, 36, 108)

    def test_elements_are_distinct_and_within_radius(self):
        ball = enumerate_ball(F2xF2, 3)
        elems = ball.elements()
        assert len(set(elems)) == len(elems)
        assert all(g.length() <= 3 for g in elems)

    def test_shortlex_sorted(self):
        ball = enumerate_ball(F2, 3)
        keys = [g.sort_key() for g in ball]
        assert keys == sorted(keys)

    def test_radius_zero(self):
        ball = enumerate_ball(F2, 0)
        assert ball.elements() == (F2.identity(),)

    def test_membership_lookup(self):
        ball = enumerate_ball(F2, 4)
        assert el("abAB") in ball
        assert el("ababa") not in ball
        assert el("(a,b)", F2xF2) not in ball

    def test_up_to_is_a_prefix(self):
        ball = enumerate_ball(F2, 5)
        small = ball.up_to(3)
        assert small.counts_by_radius == (1, 5, 17, 53)
        assert small.packed == ball.packed[: len(small.packed)]

    def test_budget_error_carries_progress(self):
        with pytest.raises(BallBudgetError) as exc:
            enumerate_ball(F2, 10, budget=100)
        assert exc.value.radius_reached < 10
        assert exc.value.budget == 100

    def test_worker_counts_agree(self):
        base = enumerate_ball(F2xF2, 3, workers=1)
        for w in (2, 4, 8):
            assert enumerate_ball(F2xF2, 3, workers=w).packed == base.packed

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=4))
    def test_every_element_within_one_of_a_neighbor(self, r):
        # spheres are exactly distance one from the previous sphere
        ball = enumerate_ball(F2, r)
        gens = F2.symmetric_generators()
        for g in ball:
            n = g.length()
            if n == 0:
                continue
            assert any((g * s).length() == n - 1 for s in gens)


class TestRelativeBall:
    def test_cyclic_line(self):
        rel = relative_ball(F2, CyclicOracle(F2, el("a")), 3)
        assert rel.counts_by_radius == (1, 3, 5, 7)
        assert [g.render() for g in rel.up_to(1)] == ["1", "a", "A"]

    def test_squares_subgroup(self):
        rel = relative_ball(F2, StallingsOracle(F2, [el("aa"), el("bb")]), 2)
        names = sorted(g.render() for g in rel)
        assert names == ["1", "AA", "BB", "aa", "bb"]

    def test_diagonal(self):
        rel = relative_ball(F2xF2, diagonal_oracle(F2xF2), 4)
        assert rel.counts_by_radius[4] == 17
        assert all(
            g.component(0) == g.component(1) for g in rel
        )

    def test_reuses_supplied_ambient_ball(self):
        ambient = enumerate_ball(F2, 5)
        rel = relative_ball(F2, CyclicOracle(F2, el("ab")), 4, ambient=ambient)
        assert rel.counts_by_radius == (1, 1, 3, 3, 5)

    def test_unknown_tally_for_budgeted_oracle(self):
        orc = parse_subgroup(F2xF2, "(a,b),(b,a)", budget_radius=2)
        rel = relative_ball(F2xF2, orc, 3)
        assert rel.unknown_count > 0
        # everything kept is certain; nothing unknown is counted
        assert all(orc.contains(g) is True for g in rel)

    def test_wrong_radius_ambient_rejected(self):
        ambient = enumerate_ball(F2, 2)
        with pytest.raises(ValueError):
            relative_ball(F2, CyclicOracle(F2, el("a")), 4, ambient=ambient)


class TestGrowthSequence:
    def test_whole_group_table(self):
        table = growth_sequence(F2, 6)
        assert table.counts == (1, 5, 17, 53, 161, 485, 1457)
        assert table.subgroup is None
        assert table.max_radius == 6

    def test_subgroup_table_tracks_oracle(self):
        table = growth_sequence(F2, 4, oracle=parse_subgroup(F2, "cyclic:a"))
        assert table.counts == (1, 3, 5, 7, 9)
        assert table.subgroup == "cyclic:a"
        assert table.unknown == (0, 0, 0, 0, 0)

    def test_no_violations_in_real_counts(self):
        table = growth_sequence(F2xF2, 4)
        assert submultiplicativity_violations(table.counts) == []

    def test_violation_detector_fires_on_fake_counts(self):
        assert submultiplicativity_violations([1, 2, 5]) == [(1, 1)]


class TestSubgroupWordLength:
    def test_identity_is_zero(self):
        assert subgroup_word_length([el("aa")], F2.identity()) == 0

    def test_powers_of_a_generator(self):
        gens = [el("aa")]
        assert subgroup_word_length(gens, el("aa")) == 1
        assert subgroup_word_length(gens, el("AAAA")) == 2
        assert subgroup_word_length(gens, el("a" * 10)) == 5

    def test_two_generator_combination(self):
        gens = [el("aa"), el("bb")]
        assert subgroup_word_length(gens, el("aabbAA")) == 3

    def test_depth_cap_raises(self):
        with pytest.raises(SearchDepthError):
            subgroup_word_length([el("aa")], el("a" * 12), depth_cap=5)


class TestDistortion:
    def test_undistorted_generator(self):
        table = distortion(F2, [el("a")], 5)
        assert table.values == (0, 1, 2, 3, 4, 5)

    def test_square_generator_halves_length(self):
        table = distortion(F2, [el("aa")], 6)
        assert table.values == (0, 0, 1, 1, 2, 2, 3)

    def test_rows_are_monotone(self):
        table = distortion(F2, [el("ab"), el("ba")], 4)
        assert all(
            table.values[i] <= table.values[i + 1]
            for i in range(table.max_radius)
        )

    def test_diagonal_of_product(self):
        gens = [el("(a,a)", F2xF2), el("(b,b)", F2xF2)]
        table = distortion(F2xF2, gens, 4, oracle=diagonal_oracle(F2xF2))
        # ambient length 2n reaches diagonal word length n
        assert table.values == (0, 0, 1, 1, 2)
