"""Tests for link prediction, ROC/AUC scoring and rolling-origin evaluation."""

from __future__ import annotations

import math
import unittest

import numpy as np
from sklearn.metrics import roc_auc_score

from network_autologit.exceptions import ConfigError, DataError, MissingFitError
from network_autologit.model.design import CoefficientBlock, covariate_row, design_width
from network_autologit.model.network import NetworkSeries, ordered_pairs
from network_autologit.model.optimizer import FitConfig
from network_autologit.model.prediction import (
    PredictionSet,
    auc,
    predict_next,
    roc,
    rolling_evaluation,
    score_coefficients,
)
from network_autologit.model.selection import LambdaGrid
from network_autologit.model.simulate import SimDesign, simulate


def random_series(seed: int, n: int = 4, T: int = 6) -> NetworkSeries:
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=(T, n, n), dtype=np.uint8)
    y[:, np.arange(n), np.arange(n)] = 0
    return NetworkSeries(y)


def zero_blocks(n: int) -> dict[tuple[int, int], CoefficientBlock]:
    return {pair: CoefficientBlock.zeros(design_width(n)) for pair in ordered_pairs(n)}


def sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


class TestScoreCoefficients(unittest.TestCase):
    def test_zero_coefficients_give_one_half(self):
        series = random_series(1)
        prediction = score_coefficients(series, zero_blocks(4), 3)
        np.testing.assert_allclose(prediction.scores(), 0.5)
        self.assertEqual(prediction.horizon, 4)
        np.testing.assert_array_equal(prediction.truth, series.slice(4))

    def test_independent_links_are_sigmoids(self):
        blocks = zero_blocks(4)
        blocks[(1, 2)] = CoefficientBlock(np.array([0.3, -0.4, 0.0]), np.zeros((3, design_width(4))))
        prediction = score_coefficients(random_series(2), blocks, 2)
        self.assertAlmostEqual(prediction.probs[0, 1], sigmoid(0.3), places=12)
        self.assertAlmostEqual(prediction.probs[1, 0], sigmoid(-0.4), places=12)

    def test_matches_brute_force_marginals(self):
        rng = np.random.default_rng(3)
        n = 5
        series = random_series(3, n=n)
        blocks = {
            pair: CoefficientBlock(rng.normal(size=3), rng.normal(0, 0.5, (3, design_width(n))))
            for pair in ordered_pairs(n)
        }
        t = 4
        prediction = score_coefficients(series, blocks, t)
        for (i, j), coef in blocks.items():
            e1, e2, e3 = coef.intercepts + coef.theta @ covariate_row(series.slice(t), i, j)
            weights = np.array([1.0, math.exp(e1), math.exp(e2), math.exp(e1 + e2 + e3)])
            p = weights / weights.sum()
            self.assertAlmostEqual(prediction.probs[i - 1, j - 1], p[1] + p[3], places=12)
            self.assertAlmostEqual(prediction.probs[j - 1, i - 1], p[2] + p[3], places=12)

    def test_missing_pair(self):
        blocks = zero_blocks(4)
        del blocks[(2, 4)]
        with self.assertRaises(MissingFitError):
            score_coefficients(random_series(4), blocks, 1)

    def test_predict_next_has_no_truth(self):
        series = random_series(5)
        prediction = predict_next(series, zero_blocks(4))
        self.assertEqual(prediction.horizon, series.T + 1)
        self.assertIsNone(prediction.truth)
        with self.assertRaises(DataError):
            prediction.labels()
        self.assertEqual(len(prediction.edges()), 12)
        i, j, p = prediction.edges()[0]
        self.assertEqual((i, j), (1, 2))
        self.assertAlmostEqual(p, 0.5)

    def test_rejects_out_of_range_probabilities(self):
        with self.assertRaises(DataError):
            PredictionSet(horizon=2, probs=np.full((3, 3), 1.5))


class TestRocAuc(unittest.TestCase):
    def test_known_values(self):
        self.assertAlmostEqual(auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]), 0.75)
        self.assertAlmostEqual(auc([0.5, 0.5], [0, 1]), 0.5)
        self.assertAlmostEqual(auc([0.9, 0.1], [1, 0]), 1.0)

    def test_agrees_with_sklearn(self):
        rng = np.random.default_rng(6)
        scores = np.round(rng.random(200), 2)
        labels = rng.integers(0, 2, 200)
        self.assertAlmostEqual(auc(scores, labels), roc_auc_score(labels, scores), places=12)
        self.assertAlmostEqual(roc(scores, labels).auc, roc_auc_score(labels, scores), places=12)

    def test_single_class(self):
        with self.assertRaises(DataError):
            auc([0.2, 0.3], [1, 1])
        with self.assertRaises(DataError):
            roc([0.2, 0.3], [0, 0])

    def test_curve_endpoints(self):
        curve = roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        self.assertEqual(curve.points()[0], (0.0, 0.0))
        self.assertEqual(curve.points()[-1], (1.0, 1.0))
        self.assertTrue(np.all(np.diff(curve.fpr) >= 0))
        self.assertTrue(np.all(np.diff(curve.tpr) >= 0))


class TestRollingEvaluation(unittest.TestCase):
    def test_holdout_bounds(self):
        series = random_series(7, T=4)
        with self.assertRaises(ConfigError):
            rolling_evaluation(series, FitConfig(lam=1.0), holdout=0)
        with self.assertRaises(ConfigError):
            rolling_evaluation(series, FitConfig(lam=1.0), holdout=3)

    def test_persistent_network_is_predictable(self):
        design = SimDesign(n=8, T=60, seed=11, alpha_mean=-2.0, beta_mean=4.0, gamma_mean=0.5)
        series, truth = simulate(design)
        result = rolling_evaluation(
            series, FitConfig(lam=4.0), holdout=2, true_blocks=truth.blocks
        )
        self.assertEqual([o.origin for o in result.origins], [58, 59])
        for origin in result.origins:
            self.assertIsNone(origin.error)
            self.assertFalse(origin.degenerate)
            self.assertGreater(origin.auc, 0.5)
            self.assertGreater(origin.true_auc, 0.5)
            self.assertAlmostEqual(origin.roc.auc, origin.auc, places=12)

    def test_degenerate_held_out_slice(self):
        y = random_series(8, T=6).y.copy()
        y[-1] = 0
        result = rolling_evaluation(NetworkSeries(y), FitConfig(lam=2.0), holdout=1)
        (origin,) = result.origins
        self.assertTrue(origin.degenerate)
        self.assertIsNone(origin.auc)
        self.assertIsNone(origin.roc)

    def test_grid_selects_a_single_lambda(self):
        series = random_series(9, T=12)
        result = rolling_evaluation(
            series, FitConfig(), holdout=2, grid=LambdaGrid.parse("2, 1e6")
        )
        self.assertIn(result.lam, (2.0, 1e6))
        self.assertTrue(all(o.lam == result.lam for o in result.origins))
        self.assertEqual(len(result.aucs()), 2)

    def test_worker_count_does_not_change_the_evaluation(self):
        series, truth = simulate(SimDesign(n=5, T=20, seed=4))
        serial, parallel = (
            rolling_evaluation(
                series,
                FitConfig(),
                holdout=2,
                grid=LambdaGrid.parse("1.5, 3"),
                workers=workers,
                true_blocks=truth.blocks,
            )
            for workers in (1, 2)
        )
        self.assertEqual(serial.lam, parallel.lam)
        self.assertEqual(serial.aucs(), parallel.aucs())
        for a, b in zip(serial.origins, parallel.origins):
            self.assertEqual(a.true_auc, b.true_auc)
            self.assertEqual(a.roc is None, b.roc is None)
            if a.roc is not None:
                np.testing.assert_array_equal(a.roc.fpr, b.roc.fpr)
                np.testing.assert_array_equal(a.roc.tpr, b.roc.tpr)


if __name__ == "__main__":
    unittest.main()
