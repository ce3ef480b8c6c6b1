import math

import pytest
from hypothesis import given, settings, strategies as st

from eg_matchlab.bounds import (BUDGET_TAGS, TailQuery, binom_tail_exact,
                                chernoff_lower, chernoff_upper,
                                eg_size_formula, large_deviation, p3_moments,
                                phi, union_budget)
from eg_matchlab.errors import InputError


def auto_p(n):
    return min(1.0, 8 * math.log(n) / n)


class TestPhi:
    def test_minus_one_exact(self):
        assert phi(-1) == 1.0

    def test_zero(self):
        assert phi(0) == 0.0

    def test_one(self):
        assert abs(phi(1) - (2 * math.log(2) - 1)) < 1e-12

    def test_domain_error(self):
        with pytest.raises(InputError):
            phi(-1.0001)

    def test_derivative_zero_at_origin(self):
        h = 1e-6
        assert abs((phi(h) - phi(-h)) / (2 * h)) < 1e-6

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-0.999, 20), st.floats(-0.999, 20))
    def test_convex(self, a, b):
        mid = (a + b) / 2
        assert phi(mid) <= (phi(a) + phi(b)) / 2 + 1e-9

    def test_continuity_at_minus_one(self):
        assert abs(phi(-1 + 1e-9) - 1.0) < 1e-7


class TestChernoff:
    def test_upper_quadratic_value(self):
        b = chernoff_upper(TailQuery(100, 0.5, 10))
        assert abs(b.quadratic_form - math.exp(-100 / (2 * (50 + 10 / 3)))) < 1e-12
        assert round(b.quadratic_form, 4) == 0.3916

    def test_lambda_zero_gives_one(self):
        b = chernoff_upper(TailQuery(50, 0.2, 0))
        assert b.phi_form == b.quadratic_form == 1.0

    def test_upper_phi_below_quadratic(self):
        for m, q in ((10, 0.01), (100, 0.1), (1000, 0.5)):
            for lam in (0.5, 1, 5, 20):
                b = chernoff_upper(TailQuery(m, q, lam))
                assert b.phi_form <= b.quadratic_form + 1e-15

    def test_upper_degenerate_mu_zero(self):
        b = chernoff_upper(TailQuery(10, 0.0, 3))
        assert b.phi_form == b.quadratic_form == 0.0
        assert b.degenerate

    def test_lower_quadratic_value(self):
        b = chernoff_lower(TailQuery(100, 0.5, 10))
        assert abs(b.quadratic_form - math.exp(-1)) < 1e-12

    def test_lower_lambda_equal_mu(self):
        b = chernoff_lower(TailQuery(100, 0.5, 50))
        assert abs(b.phi_form - math.exp(-50)) < 1e-60

    def test_lower_clamps(self):
        b = chernoff_lower(TailQuery(100, 0.5, 80))
        assert b.clamped
        assert abs(b.phi_form - math.exp(-50)) < 1e-60

    def test_bad_query(self):
        with pytest.raises(InputError):
            TailQuery(0, 0.5)
        with pytest.raises(InputError):
            TailQuery(5, 1.5)
        with pytest.raises(InputError):
            TailQuery(5, 0.5, -1)


class TestLargeDeviation:
    def test_k_equals_e_vacuous(self):
        b = large_deviation(TailQuery(100, 0.1, k_factor=math.e))
        assert b.value == 1.0 and b.vacuous

    def test_k3_value(self):
        b = large_deviation(TailQuery(100, 0.1, k_factor=3))
        assert abs(b.value - math.exp(-30 * math.log(3 / math.e))) < 1e-12
        assert round(b.value, 4) == 0.0519

    def test_dominates_exact(self):
        b = large_deviation(TailQuery(100, 0.1, k_factor=3))
        exact = binom_tail_exact(100, 0.1, 30, "gt")
        assert b.value >= exact

    def test_k_positive_required(self):
        with pytest.raises(InputError):
            large_deviation(TailQuery(10, 0.1, k_factor=0))


class TestBinomTail:
    def test_always_one(self):
        assert binom_tail_exact(7, 0.4, 0, "ge") == 1.0

    def test_small_enumeration(self):
        assert abs(binom_tail_exact(4, 0.5, 2, "gt") - 5 / 16) < 1e-12

    def test_closed_form(self):
        assert abs(binom_tail_exact(10, 0.3, 1, "lt") - 0.7 ** 10) < 1e-12

    def test_sides_consistent(self):
        for t in (0, 1, 3.5, 7):
            lo = binom_tail_exact(7, 0.4, t, "le")
            hi = binom_tail_exact(7, 0.4, t, "gt")
            assert abs(lo + hi - 1.0) < 1e-12

    def test_degenerate_q(self):
        assert binom_tail_exact(5, 0.0, 0, "le") == 1.0
        assert binom_tail_exact(5, 1.0, 4, "gt") == 1.0
        assert binom_tail_exact(5, 1.0, 5, "gt") == 0.0


class TestUnionBudget:
    def test_unknown_tag(self):
        with pytest.raises(InputError):
            union_budget("nope", 1024, 0.05)

    def test_cut_below_paper_majorization(self):
        # the documented comparison: sum over c <= n/2 of n^(-2c) < 2 n^-2
        n = 1024
        res = union_budget("CUT", n, auto_p(n))
        assert res.value <= 2.0 * n ** -2

    def test_p24a_tiny_at_2_14(self):
        res = union_budget("P24a", 2 ** 14, auto_p(2 ** 14), 0.5)
        assert res.value < 1e-6
        assert res.log10_value < -6

    def test_p25_empty_range_small_n(self):
        res = union_budget("P25", 2 ** 10, auto_p(2 ** 10))
        assert res.value == 0.0
        assert res.notes.get("empty_range")

    def test_monotone_in_p(self):
        # termwise decreasing in p; equality only where the dominant terms
        # lose their p-dependence (P24b's degenerate w=1 term, empty P25)
        n = 2 ** 10
        for tag in BUDGET_TAGS:
            hi = union_budget(tag, n, auto_p(n), 0.5).log_value
            lo = union_budget(tag, n, 1.0, 0.5).log_value
            assert lo <= hi + 1e-12, tag
            if tag not in ("P24b", "P25"):
                assert lo < hi, tag

    def test_vacuous_flagging(self):
        res = union_budget("P26", 2 ** 10, auto_p(2 ** 10), 0.5)
        assert res.vacuous and res.value > 1.0
        res = union_budget("C7a", 2 ** 14, auto_p(2 ** 14), 0.5)
        assert res.vacuous and res.value == math.inf    # beyond float range
        res = union_budget("P24a", 2 ** 10, auto_p(2 ** 10), 0.5)
        assert not res.vacuous

    def test_param_validation(self):
        with pytest.raises(InputError):
            union_budget("CUT", 1, 0.5)
        with pytest.raises(InputError):
            union_budget("CUT", 16, 0.0)
        with pytest.raises(InputError):
            union_budget("CUT", 16, 0.5, epsilon=1.0)

    def test_all_tags_evaluate(self):
        n = 2 ** 12
        for tag in BUDGET_TAGS:
            res = union_budget(tag, n, auto_p(n), 0.5)
            assert isinstance(res.log_value, float)
            assert res.tag == tag

    def test_query_object_round_trip(self):
        from eg_matchlab.bounds import BudgetQuery
        q = BudgetQuery("CUT", 2 ** 10, auto_p(2 ** 10))
        assert q.evaluate().log_value == union_budget(
            "CUT", 2 ** 10, auto_p(2 ** 10)).log_value
        with pytest.raises(InputError):
            BudgetQuery("bogus", 2 ** 10, 0.5)


class TestEgSizeFormula:
    def test_k6(self):
        assert eg_size_formula(6, 1, 2) == (5, 2)

    def test_k7(self):
        assert eg_size_formula(7, 2, 2) == (11, 2)

    def test_tie_prefers_inside(self):
        assert eg_size_formula(5, 2, 2) == (10, 1)

    def test_k0(self):
        assert eg_size_formula(9, 0, 2) == (0, 1)

    def test_infeasible(self):
        with pytest.raises(InputError):
            eg_size_formula(5, 3, 2)
        with pytest.raises(InputError):
            eg_size_formula(5, 1, 1)

    def test_l3(self):
        inside = math.comb(3 * 2 - 1, 3)
        meeting = math.comb(9, 3) - math.comb(8, 3)
        assert eg_size_formula(9, 1, 3)[0] == max(inside, meeting)


class TestP3Moments:
    def test_p_zero(self):
        m = p3_moments(10, 0.0)
        assert m.mean == 0.0 and m.ratio is None

    def test_n10_p01(self):
        m = p3_moments(10, 0.1)
        expected = 3 * math.comb(10, 3) * 0.01 * 0.9 ** 22
        assert abs(m.mean - expected) < 1e-12
        pair = 9 * math.comb(10, 3) * math.comb(7, 3) * 1e-4 * 0.9 ** 35
        assert abs(m.second_moment - (expected + pair)) < 1e-12

    def test_small_n_second_term_absent(self):
        m = p3_moments(5, 0.2)
        assert m.second_moment == m.mean

    def test_ratio_tends_to_one(self):
        n = 10 ** 6
        m = p3_moments(n, 2.0 / (3.0 * n))
        assert m.ratio is not None
        assert abs(m.ratio - 1.0) < 1e-3

    def test_monte_carlo_agreement(self):
        from eg_matchlab.harness import sample_p3_counts
        counts = sample_p3_counts(10, 0.1, 300_000, seed=2024)
        m = p3_moments(10, 0.1)
        var = m.second_moment - m.mean ** 2
        sigma = math.sqrt(var / counts.size)
        assert abs(counts.mean() - m.mean) < 3 * sigma
