"""Connector kits, the concatenation map, fibers, supermultiplicativity."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.cayley import GrowthTable, enumerate_ball, growth_sequence
from growthlab.concat import (
    AmbiguityReport,
    ConnectorKit,
    build_connector_kit,
    concat_apply,
    fiber_size,
    have_common_power,
    max_connector_score,
    measure_ambiguity,
    primitive_root,
    product_concat_apply,
    select_connector,
    sweep_exponents,
    verify_supermultiplicativity,
)
from growthlab.counting import free_ball_counts, stallings_ball_counts
from growthlab.errors import AmbiguityBudgetError, DependenceError, GroupMismatchError
from growthlab.hyperbolic import gromov_product
from growthlab.subgroups import StallingsOracle, diagonal_oracle
from growthlab.words import free_group, parse_element, parse_word_bytes, product_group

F2 = free_group(2)
F2xF2 = product_group(2, 2)
ONE = F2.identity()


def el(text, group=F2):
    return parse_element(group, text)


def random_element(rng, group, max_len=6):
    gens = group.symmetric_generators()
    g = group.identity()
    for _ in range(rng.randrange(max_len + 1)):
        g = g * rng.choice(gens)
    return g


@pytest.fixture(scope="module")
def kit2():
    return build_connector_kit(F2, el("a"), el("b"), 2)


class TestPrimitiveRoot:
    def test_power_decomposition(self):
        root, e = primitive_root(parse_word_bytes("ababab", 2))
        assert (root, e) == (parse_word_bytes("ab", 2), 3)

    def test_primitive_word(self):
        root, e = primitive_root(parse_word_bytes("aab", 2))
        assert (root, e) == (parse_word_bytes("aab", 2), 1)

    def test_conjugated_power(self):
        # b a^3 b^-1 = (b a b^-1)^3
        root, e = primitive_root(parse_word_bytes("baaaB", 2))
        assert (root, e) == (parse_word_bytes("baB", 2), 3)


class TestCommonPower:
    def test_powers_of_one_root(self):
        assert have_common_power(el("aa"), el("aaa")) is True
        assert have_common_power(el("abab"), el("BABA")) is True

    def test_distinct_conjugates_are_free(self):
        # conjugate elements need not share any power
        assert have_common_power(el("ab"), el("ba")) is False
        assert have_common_power(el("a"), el("bab") * el("bb")) is False

    def test_product_componentwise(self):
        g = el("(a,b)", F2xF2)
        assert have_common_power(g, el("(aa,bb)", F2xF2)) is True
        assert have_common_power(g, el("(aa,bbb)", F2xF2)) is False
        assert have_common_power(el("(a,1)", F2xF2), el("(1,b)", F2xF2)) is False
        assert have_common_power(el("(a,1)", F2xF2), el("(a,b)", F2xF2)) is False


class TestKitConstruction:
    def test_generator_kit(self, kit2):
        assert [p.render() for p in kit2.pieces] == ["aa", "AA", "bb", "BB"]
        assert kit2.c == 2

    def test_reduced_length_kit(self):
        kit = build_connector_kit(F2, el("ab"), el("ba"), 1)
        assert kit.c == 2
        assert [p.render() for p in kit.pieces] == ["ab", "BA", "ba", "AB"]

    def test_dependent_pair_rejected(self):
        with pytest.raises(DependenceError):
            build_connector_kit(F2, el("a"), el("a"), 2)
        with pytest.raises(DependenceError):
            build_connector_kit(F2, el("ab"), el("ababab"), 1)

    def test_trivial_elements_rejected(self):
        with pytest.raises(ValueError):
            build_connector_kit(F2, ONE, el("b"), 2)

    def test_bad_exponent(self):
        with pytest.raises(ValueError):
            build_connector_kit(F2, el("a"), el("b"), 0)

    def test_assume_independent_skips_root_check_not_coincidence(self):
        # the flag trusts the caller about roots, but identical pieces
        # still cannot form a kit
        kit = build_connector_kit(
            F2, el("a"), el("bab") * el("bb"), 1, assume_independent=True
        )
        assert len(set(kit.pieces)) == 4
        with pytest.raises(DependenceError):
            build_connector_kit(F2, el("a"), el("a"), 2, assume_independent=True)

    def test_product_group_kit(self):
        kit = build_connector_kit(
            F2xF2, el("(a,a)", F2xF2), el("(b,b)", F2xF2), 1
        )
        assert kit.c == 2


class TestSelectConnector:
    def test_opposed_powers_pick_fresh_letter(self, kit2):
        x, score = select_connector(kit2, el("AAA"), el("aaa"))
        assert x.render() == "bb"
        assert score == 0.0

    def test_identity_pair_takes_first_piece(self, kit2):
        x, score = select_connector(kit2, ONE, ONE)
        assert x.render() == "aa"
        assert score == 0.0

    def test_symmetric_case(self, kit2):
        x, score = select_connector(kit2, el("BBB"), el("bbb"))
        assert x.render() == "aa"
        assert score == 0.0

    def test_score_is_the_junction_gromov_product(self, kit2):
        rng = random.Random(13)
        for _ in range(60):
            u, v = random_element(rng, F2), random_element(rng, F2)
            x, score = select_connector(kit2, u, v)
            assert score == max(
                gromov_product(u.inverse(), x, ONE),
                gromov_product(v, x.inverse(), ONE),
            )

    def test_mismatch_rejected(self, kit2):
        with pytest.raises(GroupMismatchError):
            select_connector(kit2, el("(a,a)", F2xF2), ONE)


class TestConcatApply:
    def test_frozen_example(self, kit2):
        w = concat_apply(kit2, el("AAA"), el("aaa"))
        assert w.render() == "AAAbbaaa"
        assert w.length() == 8

    def test_identity_pair(self, kit2):
        assert concat_apply(kit2, ONE, ONE).render() == "aa"

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_image_containment(self, kit2, seed):
        rng = random.Random(seed)
        u, v = random_element(rng, F2), random_element(rng, F2)
        w = concat_apply(kit2, u, v)
        assert w.length() <= u.length() + v.length() + kit2.c

    def test_fixed_piece_preimage_is_unique(self, kit2):
        # given the image, u, and the piece, v is forced
        rng = random.Random(17)
        for _ in range(40):
            u, v = random_element(rng, F2), random_element(rng, F2)
            x, _ = select_connector(kit2, u, v)
            w = u * x * v
            assert (u * x).inverse() * w == v


class TestProductConcat:
    def test_componentwise_example(self):
        kits = [
            build_connector_kit(F2, el("a"), el("b"), 2),
            build_connector_kit(F2, el("a"), el("b"), 2),
        ]
        w = product_concat_apply(
            kits, el("(AAA,BBB)", F2xF2), el("(aaa,bbb)", F2xF2)
        )
        assert w.render() == "(AAAbbaaa,BBBaabbb)"

    def test_identity_pair(self):
        kits = [build_connector_kit(F2, el("a"), el("b"), 2)] * 2
        w = product_concat_apply(kits, F2xF2.identity(), F2xF2.identity())
        assert w.render() == "(aa,aa)"

    def test_arity_mismatch(self):
        kits = [build_connector_kit(F2, el("a"), el("b"), 2)]
        with pytest.raises(GroupMismatchError):
            product_concat_apply(kits, F2xF2.identity(), F2xF2.identity())

    def test_differing_kits_leave_the_diagonal(self):
        kits = [
            build_connector_kit(F2, el("a"), el("b"), 2),
            build_connector_kit(F2, el("b"), el("a"), 2),
        ]
        w = product_concat_apply(kits, F2xF2.identity(), F2xF2.identity())
        assert w.render() == "(aa,bb)"
        assert diagonal_oracle(F2xF2).contains(w) is False

    def test_length_bound(self):
        kits = [
            build_connector_kit(F2, el("a"), el("b"), 2),
            build_connector_kit(F2, el("ab"), el("ba"), 1),
        ]
        rng = random.Random(19)
        for _ in range(30):
            u, v = random_element(rng, F2xF2), random_element(rng, F2xF2)
            w = product_concat_apply(kits, u, v)
            assert w.length() <= u.length() + v.length() + sum(k.c for k in kits)


class TestMeasureAmbiguity:
    def test_single_pair_cell(self, kit2):
        rep = measure_ambiguity(kit2, F2, 0, 0)
        assert rep.cell(0, 0).max_fiber == 1

    def test_small_grid_frozen_values(self, kit2):
        rep = measure_ambiguity(kit2, F2, 2, 2)
        grid = {(c.s, c.t): c.max_fiber for c in rep.cells}
        assert grid == {
            (0, 0): 1, (0, 1): 1, (0, 2): 1,
            (1, 0): 1, (1, 1): 2, (1, 2): 2,
            (2, 0): 1, (2, 1): 2, (2, 2): 3,
        }
        assert rep.cell(2, 2).argmax.render() == "aaaa"
        assert (rep.slope, rep.intercept) == (1, 1)
        assert rep.violations == ()

    def test_cells_record_radius_and_pairs(self, kit2):
        rep = measure_ambiguity(kit2, F2, 1, 2)
        cell = rep.cell(1, 2)
        assert cell.radius == 1 + 2 + kit2.c
        assert cell.pairs == 5 * 17

    def test_naive_baseline_identity_fiber(self):
        for t in range(5):
            assert fiber_size(None, F2, 2 * t, t, ONE) == free_ball_counts(2, t)[t]

    def test_naive_grid_has_no_connector(self):
        rep = measure_ambiguity(None, F2, 1, 1)
        assert rep.connector == "naive"
        assert rep.c == 0
        # uv = 1 has 5 solutions over B(1) x B(1)
        assert rep.cell(1, 1).max_fiber == 5
        assert rep.cell(1, 1).argmax.is_identity()

    def test_relative_domain(self):
        orc = StallingsOracle(F2, [el("aa"), el("bb")])
        kit = build_connector_kit(F2, el("aa"), el("bb"), 1)
        rep = measure_ambiguity(kit, orc, 4, 4)
        assert rep.domain == "aa,bb"
        assert rep.max_fiber_by_t() == [1, 1, 2, 2, 3]
        assert rep.violations == ()

    def test_diagonal_domain_with_in_subgroup_kit(self):
        diag = diagonal_oracle(F2xF2)
        kit = build_connector_kit(
            F2xF2, el("(a,a)", F2xF2), el("(b,b)", F2xF2), 1
        )
        rep = measure_ambiguity(kit, diag, 4, 4)
        assert rep.max_fiber_by_t() == [1, 1, 2, 2, 3]

    def test_worker_counts_agree(self, kit2):
        base = measure_ambiguity(kit2, F2, 2, 2, workers=1)
        for w in (2, 4):
            assert measure_ambiguity(kit2, F2, 2, 2, workers=w) == base

    def test_budget_carries_partial_report(self, kit2):
        with pytest.raises(AmbiguityBudgetError) as exc:
            measure_ambiguity(kit2, F2, 2, 2, budget=30)
        partial = exc.value.partial
        assert isinstance(partial, AmbiguityReport)
        assert not partial.complete
        assert len(partial.cells) >= 1

    def test_fiber_size_matches_grid(self, kit2):
        rep = measure_ambiguity(kit2, F2, 2, 2)
        for cell in rep.cells:
            assert fiber_size(kit2, F2, cell.s, cell.t, cell.argmax) == cell.max_fiber

    def test_fiber_size_of_off_image_element_is_zero(self, kit2):
        # b cannot be hit: every image contains a connector block
        assert fiber_size(kit2, F2, 2, 2, el("b")) == 0

    def test_ambient_ball_reuse(self, kit2):
        ball = enumerate_ball(F2, 4)
        rep1 = measure_ambiguity(kit2, F2, 2, 2, ambient=ball)
        rep2 = measure_ambiguity(kit2, F2, 2, 2)
        assert rep1 == rep2


class TestConnectorScore:
    def test_generator_kit_always_finds_a_clean_piece(self, kit2):
        # u blocks at most one piece and v at most one, so the chosen
        # junctions never cancel at all
        assert max_connector_score(kit2, 3) == 0.0

    def test_score_non_increasing_in_exponent(self):
        ball = enumerate_ball(F2, 3)
        scores = []
        for n in (1, 2, 3):
            kit = build_connector_kit(F2, el("ab"), el("ba"), n)
            scores.append(max_connector_score(kit, ball))
        assert all(scores[i] >= scores[i + 1] for i in range(len(scores) - 1))

    def test_sweep_reports_per_exponent(self):
        reports = sweep_exponents(F2, el("a"), el("b"), (1, 2), 1, 1)
        assert len(reports) == 2
        assert reports[0].c == 1 and reports[1].c == 2


class TestSupermultiplicativity:
    def test_plain_form_fails_without_connectors(self):
        table = growth_sequence(F2, 4)
        res = verify_supermultiplicativity(table, 0, 1)
        assert not res.ok
        first = res.violations[0]
        assert (first.s, first.t) == (1, 1)
        assert first.lhs == 25 and first.bound == 17

    def test_shifted_form_holds_on_free_group(self):
        table = GrowthTable(F2, tuple(free_ball_counts(2, 18)))
        res = verify_supermultiplicativity(table, 2, lambda t: t + 1, s_max=8, t_max=8)
        assert res.ok and res.checked == 81

    def test_holds_on_squares_subgroup(self):
        orc = StallingsOracle(F2, [el("aa"), el("bb")])
        table = GrowthTable(
            F2, tuple(stallings_ball_counts(orc.graph, 18)), subgroup="aa,bb"
        )
        assert verify_supermultiplicativity(table, 2, lambda t: t + 1, s_max=8, t_max=8).ok

    def test_trivial_growth_passes_any_envelope(self):
        table = GrowthTable(free_group(1), (1,) * 9, subgroup="cyclic:1")
        assert verify_supermultiplicativity(table, 0, 1).ok

    def test_insufficient_range_rejected(self):
        table = growth_sequence(F2, 4)
        with pytest.raises(ValueError):
            verify_supermultiplicativity(table, 2, 1, s_max=8, t_max=8)

    def test_fractional_envelope_is_exact(self):
        # bound 17/25 beta(2) = 11.56 < 25 at (1,1): still a violation
        table = growth_sequence(F2, 2)
        res = verify_supermultiplicativity(table, 0, Fraction(17, 25))
        assert not res.ok
