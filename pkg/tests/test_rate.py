"""Root sequences, hypothesis checks, and growth-rate bracketing."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.cayley import GrowthTable
from growthlab.counting import free_ball_counts
from growthlab.errors import ParseError
from growthlab.rate import (
    FuncSpec,
    RateHypothesis,
    check_hypothesis,
    default_growth_bound,
    fekete_lower_bound,
    hypothesis_from_growth,
    parse_funcspec,
    root_sequence,
)
from growthlab.words import free_group, product_group

F2_14 = free_ball_counts(2, 14)
F2_18 = free_ball_counts(2, 18)
PLAIN = RateHypothesis()  # epsilon 1, shift 0, threshold 1


class TestFuncSpec:
    def test_constant(self):
        f = FuncSpec.constant(4)
        assert f(0) == 4 and f(7) == 4
        assert f.render() == "4"

    def test_affine(self):
        f = FuncSpec.affine(1, 1)
        assert f(0) == 1 and f(6) == 7
        assert f.render() == "1+1n"

    def test_table_and_range(self):
        f = FuncSpec.table([1, 2, 4])
        assert f(2) == 4
        with pytest.raises(ValueError):
            f(3)

    @pytest.mark.parametrize(
        "text", ["4", "7/2", "1+2n", "0+1/2n", "2n", "1-1/3n", "table:1,2,4", "table:5"]
    )
    def test_round_trip(self, text):
        spec = parse_funcspec(text)
        assert parse_funcspec(spec.render()) == spec

    @pytest.mark.parametrize("text", ["", "x", "table:", "1//2", "n", "1+n+n"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParseError):
            parse_funcspec(text)

    def test_fractional_values(self):
        assert parse_funcspec("7/2")(3) == Fraction(7, 2)
        assert parse_funcspec("1+1/2n")(3) == Fraction(5, 2)


class TestHypothesisType:
    def test_defaults(self):
        assert PLAIN.epsilon_at(5) == 1
        assert PLAIN.shift_at(5) == 0
        assert PLAIN.threshold == 1
        assert PLAIN.growth_bound is None

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            RateHypothesis(threshold=-1)

    def test_bad_growth_bound(self):
        with pytest.raises(ValueError):
            RateHypothesis(growth_bound=Fraction(0))

    def test_epsilon_below_one_rejected_at_use(self):
        hyp = RateHypothesis(epsilon=FuncSpec.constant(Fraction(1, 2)))
        with pytest.raises(ValueError):
            hyp.epsilon_at(3)

    def test_fractional_shift_rejected_at_use(self):
        hyp = RateHypothesis(shift=FuncSpec.constant(Fraction(1, 2)))
        with pytest.raises(ValueError):
            hyp.shift_at(3)

    def test_default_growth_bound_is_ball_one(self):
        assert default_growth_bound(free_group(2)) == 5
        assert default_growth_bound(product_group(2, 1)) == 7


class TestRootSequence:
    def test_geometric_is_exact(self):
        roots = root_sequence([2**n for n in range(20)])
        assert roots[0] == 1.0
        assert all(a == 2.0 for a in roots[1:])

    def test_polynomial_decays(self):
        # n+1 grows polynomially so the roots drift down toward 1
        roots = root_sequence([n + 1 for n in range(51)])
        assert abs(roots[10] - 1.27) < 0.01
        assert all(roots[n] > roots[n + 1] for n in range(2, 50))
        assert roots[50] < 1.1

    def test_free_group_roots(self):
        roots = root_sequence(F2_14)
        assert 3.0 < roots[14] < 3.2
        assert all(roots[n] > roots[n + 1] for n in range(5, 14))

    def test_zero_entry_rejected(self):
        with pytest.raises(ValueError):
            root_sequence([1, 0, 3])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            root_sequence([])

    def test_accepts_growth_table(self):
        table = GrowthTable(free_group(2), tuple(F2_14))
        assert root_sequence(table) == root_sequence(F2_14)


class TestCheckHypothesis:
    def test_geometric_equality(self):
        check = check_hypothesis([2**n for n in range(16)], PLAIN)
        assert check.ok and bool(check)
        assert check.violations == ()

    def test_free_group_fails_plain(self):
        check = check_hypothesis(F2_14, PLAIN)
        assert not check.ok
        first = check.violations[0]
        assert (first.kind, first.m, first.n) == ("combine", 1, 1)
        assert first.lhs == 25 and first.rhs == 17

    def test_free_group_affine_envelope(self):
        # measured ambiguity envelope 1+t with the two-letter connector cost
        hyp = RateHypothesis(epsilon=FuncSpec.affine(1, 1), shift=FuncSpec.constant(2))
        check = check_hypothesis(F2_18, hyp, m_max=8, n_max=8)
        assert check.ok

    def test_range_shortfall_raises(self):
        hyp = RateHypothesis(shift=FuncSpec.constant(2))
        with pytest.raises(ValueError):
            check_hypothesis(free_ball_counts(2, 6), hyp, m_max=4, n_max=4)

    def test_no_checkable_pair_raises(self):
        with pytest.raises(ValueError):
            check_hypothesis([1], PLAIN)

    def test_monotone_violation_flagged(self):
        check = check_hypothesis([1, 5, 3, 9], PLAIN)
        kinds = {v.kind for v in check.violations}
        assert "monotone" in kinds

    def test_growth_bound_violation_flagged(self):
        hyp = RateHypothesis(growth_bound=Fraction(3))
        check = check_hypothesis([5**n for n in range(6)], hyp)
        assert any(v.kind == "bound" for v in check.violations)

    def test_max_radius_truncates(self):
        full = check_hypothesis(F2_14, PLAIN)
        cut = check_hypothesis(F2_14, PLAIN, max_radius=4)
        assert cut.checked < full.checked


class TestFeketeLowerBound:
    def test_geometric_collapse(self):
        est = fekete_lower_bound([2**n for n in range(21)], PLAIN)
        assert est.certified_lower == 2.0
        assert est.empirical_upper == 2.0
        assert est.hypothesis_ok

    @given(ratio=st.integers(min_value=2, max_value=9), top=st.integers(min_value=3, max_value=24))
    @settings(max_examples=40, deadline=None)
    def test_geometric_collapse_any_ratio(self, ratio, top):
        est = fekete_lower_bound([ratio**n for n in range(top + 1)], PLAIN)
        assert est.certified_lower == float(ratio) == est.empirical_upper

    def test_constant_table(self):
        est = fekete_lower_bound([1] * 16, PLAIN)
        assert est.certified_lower == 1.0 and est.empirical_upper == 1.0

    def test_free_group_fixed_epsilon(self):
        est = fekete_lower_bound(F2_14, RateHypothesis(epsilon=FuncSpec.constant(4)))
        assert est.hypothesis_ok
        assert abs(est.certified_lower - 2.855) < 0.01
        assert est.witness_s == 14
        assert abs(est.empirical_upper - 3.152) < 0.01
        assert est.certified_lower <= 3.0 <= est.empirical_upper

    def test_conditional_when_hypothesis_fails(self):
        est = fekete_lower_bound(F2_14, PLAIN)
        assert not est.hypothesis_ok
        assert est.violations
        # the bound is still reported, just conditional
        assert est.certified_lower > 0

    def test_empty_admissible_range(self):
        with pytest.raises(ValueError):
            fekete_lower_bound([1, 2, 4], RateHypothesis(threshold=9))

    def test_lower_monotone_in_range(self):
        hyp = RateHypothesis(epsilon=FuncSpec.constant(4))
        lowers = [
            fekete_lower_bound(F2_14, hyp, max_radius=k).certified_lower
            for k in range(2, 15)
        ]
        assert all(a <= b for a, b in zip(lowers, lowers[1:]))

    def test_walk_decomposition(self):
        est = fekete_lower_bound(F2_14, RateHypothesis(epsilon=FuncSpec.constant(4)))
        period = est.witness_s + 0
        for row in est.walk:
            assert row.q * period + row.r == row.n
            assert 0 <= row.r < period
            assert row.bound <= est.certified_lower * (1 + 1e-9)

    def test_walk_geometric_saturates(self):
        est = fekete_lower_bound([2**n for n in range(12)], PLAIN)
        assert all(row.bound == 2.0 for row in est.walk)

    def test_json_shape(self):
        est = fekete_lower_bound(F2_14, PLAIN)
        blob = est.to_json()
        for key in ("lower", "upper", "witness_s", "hypothesis_ok", "violations"):
            assert key in blob
        assert blob["violations"][0]["lhs"] == "25"


class TestMeasuredHypothesis:
    def test_free_group_measures_to_one(self):
        # worst beta(s)beta(t)/beta(s+t+2) on the 8x8 grid is about 0.222
        table = GrowthTable(free_group(2), tuple(F2_18))
        hyp = hypothesis_from_growth(table, 2, s_max=8, t_max=8)
        assert hyp.epsilon.render() == "1"
        assert hyp.shift_at(3) == 2
        assert hyp.growth_bound == 5

    def test_bracket_contains_rate(self):
        table = GrowthTable(free_group(2), tuple(F2_18))
        hyp = hypothesis_from_growth(table, 2, s_max=8, t_max=8)
        est = fekete_lower_bound(F2_14, hyp)
        assert est.hypothesis_ok
        assert est.certified_lower <= 3.0 <= est.empirical_upper
        assert est.empirical_upper - est.certified_lower <= 0.5

    def test_zero_shift_measurement(self):
        hyp = hypothesis_from_growth(F2_18, 0)
        assert hyp.epsilon(0) < 3
        est = fekete_lower_bound(F2_18, hyp)
        assert est.hypothesis_ok
        assert est.certified_lower <= est.empirical_upper

    def test_measured_hypothesis_passes_own_check(self):
        for c in (0, 1, 2):
            hyp = hypothesis_from_growth(F2_14, c)
            assert check_hypothesis(F2_14, hyp).ok

    @given(
        st.lists(st.integers(min_value=1, max_value=50), min_size=3, max_size=12),
        st.integers(min_value=0, max_value=2),
    )
    @settings(max_examples=60, deadline=None)
    def test_measured_hypothesis_consistent(self, deltas, c):
        # any monotone positive table passes the hypothesis it was measured from
        counts = [1]
        for d in deltas:
            counts.append(counts[-1] + d)
        hyp = hypothesis_from_growth(counts, c)
        assert check_hypothesis(counts, hyp).ok

    def test_coverage_demanded(self):
        with pytest.raises(ValueError):
            hypothesis_from_growth(free_ball_counts(2, 6), 2, s_max=4, t_max=4)
        with pytest.raises(ValueError):
            hypothesis_from_growth(F2_14, 2, s_max=4, t_max=None)
