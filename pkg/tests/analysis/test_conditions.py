"""Tests for the truncated-moment condition terms and their trend classifier."""

import math

import pytest

from tensor_mp.analysis.conditions import (
    Method,
    Trend,
    classify_trend,
    condition14,
    condition_thm4,
    regime_classifier,
)
from tensor_mp.core.distributions import (
    ExponentialZ,
    Gaussian,
    OnesZ,
    Rademacher,
    SparseBernoulli,
    SquaredEntryZ,
    StudentT,
    TwoPoint,
)
from tensor_mp.core.errors import PreconditionError
from tensor_mp.core.rng import RngStream
from tensor_mp.utils import parse_d_rule

GRID = [100, 1000, 10_000, 100_000]


class TestCondition14:
    @pytest.mark.parametrize("n, d", [(10, 1), (50, 7), (64, 64)])
    def test_rademacher(self, n, d):
        report = condition14(Rademacher(), d, n)
        assert report.method is Method.ANALYTIC
        assert report.term_truncated_tail == 0.0
        assert report.term_truncated_fourth == pytest.approx(d * d / n, rel=1e-15)

    def test_sparse_tail_regime(self):
        report = condition14(SparseBernoulli(0.01), 2, 100)
        assert report.term_truncated_tail == pytest.approx(2.0)
        assert report.term_truncated_fourth == 0.0

    def test_sparse_fourth_regime(self):
        report = condition14(SparseBernoulli(0.5), 2, 100)
        assert report.term_truncated_tail == 0.0
        assert report.term_truncated_fourth == pytest.approx(4 / (100 * 0.5))

    @pytest.mark.parametrize("q", [0.01, 0.5])
    def test_sparse_monte_carlo_agrees(self, q):
        dist = SparseBernoulli(q)
        exact = condition14(dist, 2, 100)
        mc = condition14(
            dist, 2, 100, Method.MONTE_CARLO, reps=10**6, rng=RngStream(17)
        )
        assert mc.method is Method.MONTE_CARLO
        assert abs(mc.term_truncated_tail - exact.term_truncated_tail) <= (
            4 * mc.tail_std_error
        )
        assert abs(mc.term_truncated_fourth - exact.term_truncated_fourth) <= (
            4 * mc.fourth_std_error
        )

    @pytest.mark.parametrize(
        "dist", [Gaussian(), TwoPoint(2.0), SparseBernoulli(0.2), Rademacher()]
    )
    @pytest.mark.parametrize("d, n", [(1, 5), (3, 10), (40, 100)])
    def test_decomposition(self, dist, d, n):
        report = condition14(dist, d, n)
        assert report.decomposition == pytest.approx(1.0, abs=1e-10)

    def test_student_t_defaults_to_monte_carlo(self):
        report = condition14(StudentT(5.0), 2, 100, reps=20_000, rng=RngStream(3))
        assert report.method is Method.MONTE_CARLO
        assert report.reps == 20_000
        assert report.tail_std_error > 0

    def test_student_t_has_no_closed_form(self):
        with pytest.raises(PreconditionError):
            condition14(StudentT(5.0), 2, 100, Method.ANALYTIC)

    def test_rejects_order_above_n(self):
        with pytest.raises(PreconditionError):
            condition14(Gaussian(), 11, 10)

    def test_rejects_uneven_batches(self):
        with pytest.raises(PreconditionError):
            condition14(Gaussian(), 2, 10, Method.MONTE_CARLO, reps=1010)

    def test_tail_grows_with_order(self):
        tails = [
            condition14(Gaussian(), d, 100).term_truncated_tail for d in range(1, 51)
        ]
        assert all(b >= a for a, b in zip(tails, tails[1:]))


class TestConditionThm4:
    def test_ones(self):
        report = condition_thm4(OnesZ(), 3, 30)
        assert report.term_truncated_tail == 0.0
        assert report.term_truncated_fourth == pytest.approx(9 / 30)

    @pytest.mark.parametrize("q, d", [(0.1, 2), (0.1, 20), (0.7, 5)])
    def test_squared_entry_matches_condition14(self, q, d):
        assert condition_thm4(SquaredEntryZ(SparseBernoulli(q)), d, 100) == (
            condition14(SparseBernoulli(q), d, 100)
        )

    def test_exponential_monte_carlo_agrees(self):
        exact = condition_thm4(ExponentialZ(), 5, 20)
        mc = condition_thm4(
            ExponentialZ(), 5, 20, Method.MONTE_CARLO, reps=10**6, rng=RngStream(8)
        )
        assert exact.decomposition == pytest.approx(1.0, abs=1e-10)
        assert abs(mc.term_truncated_tail - exact.term_truncated_tail) <= (
            4 * mc.tail_std_error
        )
        assert abs(mc.term_truncated_fourth - exact.term_truncated_fourth) <= (
            4 * mc.fourth_std_error
        )

    def test_exponential_closed_form(self):
        # E Z 1(Z > c) = (1 + c) e^{-c}
        report = condition_thm4(ExponentialZ(), 5, 20)
        assert report.term_truncated_tail == pytest.approx(5 * 5 * math.exp(-4.0))


class TestClassifyTrend:
    @pytest.mark.parametrize(
        "values, expected",
        [
            ([1.0, 0.5, 0.25], Trend.DECREASING),
            ([0.0, 0.0, 0.0], Trend.ZERO),
            ([2.0, 2.05, 1.98], Trend.FLAT),
            ([1.0, 2.0, 4.0], Trend.INCREASING),
            ([1.0, 3.0, 0.5], Trend.MIXED),
        ],
    )
    def test_cases(self, values, expected):
        assert classify_trend(values) is expected

    def test_vanishing(self):
        assert Trend.ZERO.vanishing and Trend.DECREASING.vanishing
        assert not Trend.FLAT.vanishing

    def test_rejects_empty(self):
        with pytest.raises(PreconditionError):
            classify_trend([])


class TestRegimeClassifier:
    def test_gaussian_sqrt_over_log_vanishes(self):
        table = regime_classifier(Gaussian(), parse_d_rule("sqrt-over-log"), GRID)
        assert [r.d for r in table.rows] == [2, 4, 10, 27]
        assert table.tail_trend.vanishing
        assert table.fourth_trend is Trend.DECREASING
        assert table.both_vanishing

    def test_gaussian_sqrt_order_keeps_fourth_term(self):
        table = regime_classifier(Gaussian(), parse_d_rule("floor(2*n^0.5)"), GRID)
        assert table.rows[-1].report.term_truncated_fourth == pytest.approx(
            12.0, rel=0.01
        )
        assert not table.fourth_trend.vanishing
        assert not table.both_vanishing

    def test_sparse_family(self):
        table = regime_classifier(
            lambda n: SparseBernoulli(1 / math.sqrt(n)),
            parse_d_rule("const:1"),
            [100, 400, 1600],
        )
        assert table.tail_trend is Trend.ZERO
        assert table.fourth_trend is Trend.DECREASING
        assert table.rows[0].law == "sparse:0.1"
        for row in table.rows:
            assert row.report.term_truncated_fourth == pytest.approx(
                1 / math.sqrt(row.n)
            )

    def test_z_law(self):
        table = regime_classifier(OnesZ(), parse_d_rule("const:2"), [10, 20, 40])
        fourth = [r.report.term_truncated_fourth for r in table.rows]
        assert fourth == pytest.approx([0.4, 0.2, 0.1])

    def test_order_is_clamped(self):
        table = regime_classifier(Gaussian(), lambda n: 10 * n, [5, 8])
        assert [r.d for r in table.rows] == [5, 8]
        table = regime_classifier(Gaussian(), lambda n: 0, [5, 8])
        assert [r.d for r in table.rows] == [1, 1]

    def test_monte_carlo_is_reproducible(self):
        def run():
            return regime_classifier(
                StudentT(5.0),
                parse_d_rule("const:2"),
                [20, 40],
                reps=4000,
                rng=RngStream(21),
            )

        assert run() == run()

    @pytest.mark.parametrize("grid", [[], [10, 10], [20, 10]])
    def test_rejects_bad_grid(self, grid):
        with pytest.raises(PreconditionError):
            regime_classifier(Gaussian(), lambda n: 1, grid)
