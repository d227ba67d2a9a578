"""Tests for covariate construction and effect accounting."""

from __future__ import annotations

import unittest

import numpy as np

from network_autologit.exceptions import ConfigError, DataError, PairOrderError
from network_autologit.model.design import (
    CATEGORIES,
    CoefficientBlock,
    Column,
    EffectFamily,
    build_design,
    column_labels,
    covariate_row,
    design_width,
    effect_counts,
    pair_count,
    total_parameter_count,
)
from network_autologit.model.network import NetworkSeries, dyad_outcomes


def random_series(seed: int, n: int = 5, T: int = 8) -> NetworkSeries:
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=(T, n, n), dtype=np.uint8)
    y[:, np.arange(n), np.arange(n)] = 0
    return NetworkSeries(y)


class TestEffectAccounting(unittest.TestCase):
    def test_seventy_one_node_counts(self):
        self.assertEqual(design_width(71), 417)
        counts = effect_counts(71)
        self.assertEqual(tuple(counts[:4]), (6, 3, 828, 414))
        self.assertEqual(counts.total, 1251)
        self.assertEqual(counts.total, 3 * design_width(71))
        self.assertEqual(pair_count(71), 2485)
        self.assertEqual(total_parameter_count(71), 2485 * 1251)
        self.assertEqual(total_parameter_count(71), 3_108_735)

    def test_small_counts(self):
        self.assertEqual(tuple(effect_counts(3)[:4]), (6, 3, 12, 6))
        self.assertEqual(total_parameter_count(3), 81)
        self.assertEqual(total_parameter_count(2), 9)

    def test_two_nodes_is_degenerate(self):
        counts = effect_counts(2)
        self.assertTrue(counts.degenerate)
        self.assertEqual((counts.diversification, counts.disintermediation), (0, 0))
        with self.assertRaises(ConfigError):
            effect_counts(1)

    def test_column_partition_matches_counts(self):
        for n in (3, 5, 8):
            columns = column_labels(n, 1, 2)
            per_class = {c: 0 for c in CATEGORIES}
            for column in columns:
                per_class[column.category] += 1
            counts = effect_counts(n)
            self.assertEqual(per_class["persistence"] * 3, counts.persistence)
            self.assertEqual(per_class["reciprocity"] * 3, counts.reciprocity)
            self.assertEqual(per_class["diversification"] * 3, counts.diversification)
            self.assertEqual(per_class["disintermediation"] * 3, counts.disintermediation)


class TestColumns(unittest.TestCase):
    def test_order_for_pair_two_four(self):
        columns = column_labels(5, 2, 4)
        ks = [1, 3, 5]
        expected = (
            [Column(EffectFamily.PERSISTENCE_SELF), Column(EffectFamily.PERSISTENCE_OTHER)]
            + [Column(EffectFamily.DIVERSIFY_OUT, k) for k in ks]
            + [Column(EffectFamily.DIVERSIFY_IN, k) for k in ks]
            + [Column(EffectFamily.DIVERSIFY_OUT_OTHER, k) for k in ks]
            + [Column(EffectFamily.DIVERSIFY_IN_OTHER, k) for k in ks]
            + [Column(EffectFamily.INTER_RECIPROCITY)]
            + [Column(EffectFamily.DISINTERMEDIATION_FWD, k) for k in ks]
            + [Column(EffectFamily.DISINTERMEDIATION_REV, k) for k in ks]
        )
        self.assertEqual(list(columns), expected)
        self.assertEqual(len(columns), design_width(5))

    def test_third_node_presence_is_checked(self):
        with self.assertRaises(ConfigError):
            Column(EffectFamily.DIVERSIFY_OUT)
        with self.assertRaises(ConfigError):
            Column(EffectFamily.PERSISTENCE_SELF, 3)

    def test_covariate_row_terms(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        a[0, 1] = 1  # y_12
        a[0, 2] = 1  # y_13
        a[2, 1] = 1  # y_32
        a[1, 3] = 1  # y_24
        a[3, 0] = 1  # y_41
        x = covariate_row(a, 1, 2)
        # [y12, y21, y13 y14, y32 y42, y23 y24, y31 y41, y12*y21, y13*y32 y14*y42, y23*y31 y24*y41]
        expected = [1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1]
        np.testing.assert_array_equal(x, expected)

    def test_covariate_row_rejects_bad_pair(self):
        with self.assertRaises(PairOrderError):
            covariate_row(np.zeros((3, 3)), 3, 1)


class TestBuildDesign(unittest.TestCase):
    def test_shapes_and_alignment(self):
        series = random_series(11)
        design = build_design(series, 2, 5)
        self.assertEqual(design.X.shape, (series.T - 1, design_width(series.n)))
        self.assertEqual(design.m, series.T - 1)
        np.testing.assert_array_equal(design.responses, dyad_outcomes(series, 2, 5)[1:])
        for t in range(1, series.T):
            np.testing.assert_array_equal(design.X[t - 1], covariate_row(series.slice(t), 2, 5))

    def test_entries_are_binary(self):
        design = build_design(random_series(12), 1, 3)
        self.assertTrue(np.isin(design.X, (0, 1)).all())
        self.assertFalse(design.X.flags.writeable)

    def test_zero_slice_gives_zero_row(self):
        y = random_series(13).y.copy()
        y[2] = 0
        design = build_design(NetworkSeries(y), 1, 2)
        self.assertFalse(design.X[2].any())

    def test_n3_width(self):
        self.assertEqual(build_design(random_series(14, n=3), 1, 2).d, 9)

    def test_needs_two_slices(self):
        with self.assertRaises(DataError):
            build_design(random_series(15, T=1), 1, 2)

    def test_linear_predictor_matches_term_by_term_evaluation(self):
        rng = np.random.default_rng(16)
        n = 4
        series = random_series(16, n=n)
        i, j = 1, 3
        design = build_design(series, i, j)
        coef = CoefficientBlock(rng.normal(size=3), rng.normal(size=(3, design.d)))
        ks = [k for k in range(n) if k not in (i - 1, j - 1)]
        for t in range(series.T - 1):
            y = series.y[t].astype(float)
            a, b = i - 1, j - 1
            for r in range(3):
                th = dict(zip(design.columns, coef.theta[r]))
                direct = (
                    coef.intercepts[r]
                    + th[Column(EffectFamily.PERSISTENCE_SELF)] * y[a, b]
                    + th[Column(EffectFamily.PERSISTENCE_OTHER)] * y[b, a]
                    + th[Column(EffectFamily.INTER_RECIPROCITY)] * y[a, b] * y[b, a]
                )
                for k in ks:
                    direct += (
                        th[Column(EffectFamily.DIVERSIFY_OUT, k + 1)] * y[a, k]
                        + th[Column(EffectFamily.DIVERSIFY_IN, k + 1)] * y[k, b]
                        + th[Column(EffectFamily.DIVERSIFY_OUT_OTHER, k + 1)] * y[b, k]
                        + th[Column(EffectFamily.DIVERSIFY_IN_OTHER, k + 1)] * y[k, a]
                        + th[Column(EffectFamily.DISINTERMEDIATION_FWD, k + 1)] * y[a, k] * y[k, b]
                        + th[Column(EffectFamily.DISINTERMEDIATION_REV, k + 1)] * y[b, k] * y[k, a]
                    )
                via_dot = coef.intercepts[r] + design.X[t] @ coef.theta[r]
                self.assertAlmostEqual(via_dot, direct, places=12)


class TestCoefficientBlock(unittest.TestCase):
    def test_rejects_non_finite(self):
        theta = np.zeros((3, 9))
        theta[1, 2] = np.nan
        with self.assertRaises(DataError):
            CoefficientBlock(np.zeros(3), theta)

    def test_active_columns(self):
        block = CoefficientBlock.zeros(9)
        block.theta[0, 4] = 1.0
        block.theta[2, 4] = -1.0
        block.theta[1, 7] = 0.5
        np.testing.assert_array_equal(block.active_columns(), [4, 7])
        self.assertEqual(block.nonzero_count(), 3)


if __name__ == "__main__":
    unittest.main()
