"""The oracles themselves, pinned on hand-checkable cases."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from sliceminer.model import Filters, Interval
from sliceminer.oracle import (exact_hypergeom_pvalue,
                               exhaustive_categorical_slices,
                               exhaustive_shortest_interval)
from tests.conftest import dataset_from_columns


class TestExactPValue:
    def test_small_rational(self):
        # C(5,0)C(5,4) + C(5,1)C(5,3) over C(10,4) = (5 + 50) / 210
        assert exact_hypergeom_pvalue(10, 5, 4, 1) == Fraction(55, 210)

    def test_full_tail_is_one(self):
        assert exact_hypergeom_pvalue(40, 25, 10, 10) == Fraction(1)
        assert exact_hypergeom_pvalue(40, 25, 30, 25) == Fraction(1)

    def test_worked_example_value(self):
        value = float(exact_hypergeom_pvalue(300, 230, 21, 14))
        assert 0.188 <= value <= 0.198

    def test_budget_enforced(self):
        with pytest.raises(ValueError):
            exact_hypergeom_pvalue(2001, 100, 10, 5)


class TestExhaustiveInterval:
    def test_matches_module_example(self):
        got = exhaustive_shortest_interval([0, 1, 2, 3, 10], 0.6)
        assert got == Interval(0.0, 2.0)

    def test_full_range(self):
        got = exhaustive_shortest_interval([5, 1, 9, 4], 1.0)
        assert got == Interval(1.0, 9.0)

    def test_single_value(self):
        assert exhaustive_shortest_interval([7], 0.5) == Interval(7.0, 7.0)


class TestExhaustiveCategorical:
    def test_planted_value_found(self, tmp_path):
        rng = np.random.default_rng(11)
        n = 200
        f1 = rng.integers(0, 2, n)
        f2 = np.where(np.arange(n) < 40, "bad", "good")
        correct = np.ones(n, dtype=bool)
        correct[:40] = False  # every "bad" row mispredicted
        ds = dataset_from_columns(
            tmp_path, {"f1": f1.tolist(), "f2": f2.tolist()}, correct.tolist())
        filters = Filters(min_support=2, perf_threshold=0.5, p_value_max=0.05)
        assert exhaustive_categorical_slices(ds, filters) == {("f2", "bad")}

    def test_all_correct_dataset_empty(self, tmp_path):
        ds = dataset_from_columns(
            tmp_path, {"f1": ["a", "b"] * 30}, [True] * 60)
        filters = Filters(min_support=2, perf_threshold=0.5, p_value_max=0.05)
        assert exhaustive_categorical_slices(ds, filters) == set()

    def test_disabled_filters_report_everything(self, tmp_path):
        # every (feature, value) slice is half wrong, so none has p-value 1
        ds = dataset_from_columns(
            tmp_path,
            {"f1": ["a"] * 30 + ["b"] * 30, "f2": ["x", "y"] * 30},
            [True, False] * 15 + [False, True] * 15)
        filters = Filters(min_support=2, perf_threshold=1.0, p_value_max=0.999999)
        got = exhaustive_categorical_slices(ds, filters)
        assert got == {("f1", "a"), ("f1", "b"), ("f2", "x"), ("f2", "y")}
