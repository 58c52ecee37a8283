import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from multiras import (
    BalanceConfig,
    MarginSet,
    ShapeMismatchError,
    Tensor,
    aggregate_slices,
    balance,
    classical_ras,
    distance_matrix,
    frobenius_distance,
    relative_deviation,
)

from .conftest import lognormal_tensor, positive_tensor
from .oracles import frobenius_by_loops


class TestFrobeniusDistance:
    def test_identical_is_zero(self, rng):
        t = positive_tensor(rng, (3, 3))
        assert frobenius_distance(t, t) == 0.0

    def test_3_4_5(self):
        a = Tensor([[0.0, 3.0], [4.0, 0.0]])
        assert frobenius_distance(a, Tensor(np.zeros((2, 2)))) == 5.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            frobenius_distance(Tensor(np.ones((2, 2))), Tensor(np.ones((3, 2))))

    @settings(max_examples=40, deadline=None)
    @given(
        hnp.arrays(np.float64, (2, 3), elements=st.floats(0, 50, allow_nan=False)),
        hnp.arrays(np.float64, (2, 3), elements=st.floats(0, 50, allow_nan=False)),
        hnp.arrays(np.float64, (2, 3), elements=st.floats(0, 50, allow_nan=False)),
    )
    def test_metric_properties(self, a, b, c):
        ta, tb, tc = Tensor(a), Tensor(b), Tensor(c)
        dab = frobenius_distance(ta, tb)
        assert dab == frobenius_distance(tb, ta)
        assert frobenius_distance(ta, ta) == 0.0
        if np.array_equal(a, b):
            assert dab == 0.0
        else:
            assert dab > 0.0
        assert dab <= frobenius_distance(ta, tc) + frobenius_distance(tc, tb) + 1e-9


class TestDistanceMatrix:
    def test_single_table(self, rng):
        t = positive_tensor(rng, (2, 2))
        dist = distance_matrix([("only", t)])
        assert dist.names == ("only",)
        assert dist.values.tolist() == [[0.0]]

    def test_two_tables(self, rng):
        a = positive_tensor(rng, (3, 3))
        b = positive_tensor(rng, (3, 3))
        dist = distance_matrix({"a": a, "b": b})
        assert dist[0, 1] == frobenius_distance(a, b)
        assert dist[1, 0] == dist[0, 1]

    def test_three_tables_match_brute_force(self, rng):
        tables = [(f"t{i}", positive_tensor(rng, (4, 4))) for i in range(3)]
        dist = distance_matrix(tables)
        assert np.all(np.diag(dist.values) == 0.0)
        np.testing.assert_array_equal(dist.values, dist.values.T)
        for i in range(3):
            for j in range(3):
                expected = frobenius_by_loops(tables[i][1].values, tables[j][1].values)
                assert dist[i, j] == pytest.approx(expected, abs=1e-12)

    def test_table_layout_real_ras_dras(self, rng):
        # the symmetric three-way layout used to report total distances
        # between a reference table and two competing estimates
        real = positive_tensor(rng, (5, 5))
        ras = positive_tensor(rng, (5, 5))
        dras = positive_tensor(rng, (5, 5))
        dist = distance_matrix([("Real", real), ("RAS", ras), ("DRAS", dras)])
        assert dist.names == ("Real", "RAS", "DRAS")
        assert np.all(np.diag(dist.values) == 0.0)
        np.testing.assert_array_equal(dist.values, dist.values.T)
        assert dist[0, 1] > 0 and dist[0, 2] > 0 and dist[1, 2] > 0


class TestAggregateSlices:
    def test_sum_of_identical_quarters(self):
        quarter = np.array([[1.0, 2.0], [3.0, 4.0]])
        stacked = Tensor(np.stack([quarter] * 4, axis=2), ("r", "c", "q"))
        total = aggregate_slices(stacked, 2)
        np.testing.assert_allclose(total.values, 4.0 * quarter)
        assert total.dim_names == ("r", "c")

    def test_balanced_solution_reproduces_slice_margin(self, rng):
        target = lognormal_tensor(rng, (6, 6, 3))
        margins = MarginSet.from_tensor(target)
        m = positive_tensor(rng, (6, 6, 3))
        result = balance(m, margins, BalanceConfig(margin_threshold=1e-9))
        national = aggregate_slices(result.solution, 2)
        np.testing.assert_allclose(
            national.values, margins[2].values, atol=1e-8
        )

    def test_independent_slice_balancing_misses_total(self, rng):
        # balancing each slice on its own row/column totals does not make
        # the slice sum reproduce the total table
        target = lognormal_tensor(rng, (6, 6, 3), sigma=1.5)
        national = target.margin(2)
        acc = np.zeros((6, 6))
        for k in range(3):
            rows = target.values[:, :, k].sum(axis=1)
            cols = target.values[:, :, k].sum(axis=0)
            est = classical_ras(national, rows, cols, BalanceConfig(margin_threshold=1e-10))
            acc += est.solution.values
        deviation = np.abs(acc - national.values) / national.values
        assert deviation.max() > 1e-3


class TestRelativeDeviation:
    def test_identical_all_zero(self, rng):
        t = positive_tensor(rng, (3, 3))
        report = relative_deviation(t, t)
        assert np.all(report.relative_deviation == 0.0)
        assert report.summary["max_abs_relative"] == 0.0
        assert report.summary["flagged_cells"] == 0

    def test_110_percent(self):
        report = relative_deviation(Tensor([2.0]), Tensor([4.2]))
        assert report.relative_deviation[0] == pytest.approx(1.10, abs=1e-12)
        assert report.summary["cells_exceeding"][1.0] == 1

    def test_sign_convention_overestimate_positive(self):
        report = relative_deviation(Tensor([4.0]), Tensor([3.0]))
        assert report.relative_deviation[0] == pytest.approx(-0.25)

    def test_zero_reference_flag_policy(self):
        reference = Tensor([0.0, 0.0, 2.0])
        estimate = Tensor([0.0, 1.0, 2.0])
        report = relative_deviation(reference, estimate, zero_policy="flag")
        assert report.summary["flagged_cells"] == 2
        assert np.isnan(report.relative_deviation[0])
        assert np.isnan(report.relative_deviation[1])
        assert report.summary["max_abs_relative"] == 0.0  # only the 2 vs 2 cell counts

    def test_zero_reference_both_zero_policy(self):
        reference = Tensor([0.0, 0.0, 2.0])
        estimate = Tensor([0.0, 1.0, 3.0])
        report = relative_deviation(reference, estimate, zero_policy="zero-if-both-zero")
        assert report.relative_deviation[0] == 0.0
        assert np.isnan(report.relative_deviation[1])
        assert report.summary["flagged_cells"] == 1
        assert report.summary["max_abs_relative"] == pytest.approx(0.5)
        # flagged cell excluded from the mean: (0 + 0.5) / 2
        assert report.summary["mean_abs_relative"] == pytest.approx(0.25)

    def test_summary_recomputable(self, rng):
        reference = positive_tensor(rng, (4, 4))
        estimate = positive_tensor(rng, (4, 4))
        report = relative_deviation(reference, estimate)
        assert report.recompute_summary() == report.summary

    def test_frobenius_in_summary(self, rng):
        reference = positive_tensor(rng, (3, 3))
        estimate = positive_tensor(rng, (3, 3))
        report = relative_deviation(reference, estimate)
        assert report.summary["frobenius_of_difference"] == pytest.approx(
            frobenius_distance(reference, estimate)
        )

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            relative_deviation(Tensor(np.ones((2, 2))), Tensor(np.ones((2, 3))))

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            relative_deviation(Tensor([1.0]), Tensor([1.0]), zero_policy="bogus")
