"""Tests for synthetic sequences and ground-truth recovery."""

from __future__ import annotations

import os
import unittest

import numpy as np
from joblib import cpu_count
from scipy.stats import chisquare

from network_autologit.exceptions import ConfigError, DataError, MissingFitError
from network_autologit.model.design import (
    CoefficientBlock,
    Column,
    EffectFamily,
    column_labels,
    design_width,
)
from network_autologit.model.likelihood import outcome_probs
from network_autologit.model.network import dyad_outcomes, ordered_pairs
from network_autologit.model.optimizer import FitConfig
from network_autologit.model.prediction import rolling_evaluation
from network_autologit.model.selection import LambdaGrid, bic_path
from network_autologit.model.simulate import (
    GroundTruth,
    SimDesign,
    forward_sample,
    generate_coefficients,
    pair_groups,
    pair_triple,
    simulate,
    support_recovery,
)

NULL_EFFECTS = dict(beta_mean=0.0, beta_sd=0.0, gamma_mean=0.0, gamma_sd=0.0, xi_magnitude=0.0)


class TestSimDesign(unittest.TestCase):
    def test_invalid_designs(self):
        cases = [
            dict(n=4, T=5),
            dict(n=5, T=0),
            dict(n=5, T=5, groups=11),
            dict(n=5, T=5, groups=0),
            dict(n=5, T=5, alpha_sd=-1.0),
            dict(n=5, T=5, xi_magnitude=-0.5),
            dict(n=5, T=5, alpha_mean=(1.0, 2.0)),
            dict(n=6, T=5, groups=2, triples=((1, 2, 3),)),
            dict(n=6, T=5, groups=1, triples=((1, 1, 3),)),
            dict(n=6, T=5, groups=1, triples=((1, 2, 7),)),
        ]
        for kwargs in cases:
            with self.subTest(**{k: str(v) for k, v in kwargs.items()}), self.assertRaises(ConfigError):
                SimDesign(**kwargs)

    def test_scalars_broadcast(self):
        design = SimDesign(n=5, T=3, alpha_mean=-1.0)
        self.assertEqual(design.alpha_mean, (-1.0, -1.0, -1.0))

    def test_from_mapping(self):
        design = SimDesign.from_mapping({"n": 6, "T": 4, "seed": None, "triples": [[1, 2, 3]], "groups": 1})
        self.assertEqual(design.triples, ((1, 2, 3),))
        self.assertEqual(design.seed, 0)
        self.assertEqual(design.as_dict()["n"], 6)


class TestGroundTruth(unittest.TestCase):
    def test_six_nonzero_per_class(self):
        truth = generate_coefficients(SimDesign(n=8, T=2, seed=1))
        self.assertEqual(len(truth.blocks), 28)
        for sizes in truth.support_sizes().values():
            self.assertEqual(sizes, [6, 6, 6])

    def test_zero_variance_gives_means(self):
        design = SimDesign(n=6, T=2, alpha_sd=0.0, beta_sd=0.0, gamma_sd=0.0, beta_mean=(1.0, 2.0, 3.0))
        for block in generate_coefficients(design).blocks.values():
            np.testing.assert_array_equal(block.theta[:, 0], [1.0, 2.0, 3.0])
            np.testing.assert_array_equal(block.theta[:, 1], [1.0, 1.0, 1.0])
            np.testing.assert_array_equal(block.intercepts, [0.0, 0.0, 0.0])

    def test_xi_sign_opposes_persistence(self):
        positive = SimDesign(n=6, T=2, beta_sd=0.0, gamma_sd=0.0, xi_magnitude=2.0)
        negative = SimDesign(
            n=6, T=2, beta_mean=-1.0, gamma_mean=-1.0, beta_sd=0.0, gamma_sd=0.0, xi_magnitude=2.0
        )
        for design, expected in ((positive, -2.0), (negative, 2.0)):
            truth = generate_coefficients(design)
            for (i, j), block in truth.blocks.items():
                columns = column_labels(6, i, j)
                for k in truth.triples[(i, j)]:
                    index = columns.index(Column(EffectFamily.DISINTERMEDIATION_FWD, k))
                    np.testing.assert_array_equal(block.theta[:, index], expected)

    def test_groups_are_contiguous_and_balanced(self):
        groups = pair_groups(5, 4)
        self.assertEqual([groups[p] for p in ordered_pairs(5)], [0, 0, 0, 1, 1, 1, 2, 2, 3, 3])

    def test_default_triples_skip_the_pair(self):
        design = SimDesign(n=8, T=2)
        self.assertEqual(pair_triple(design, 0, 1, 2), (3, 4, 5))
        self.assertEqual(pair_triple(design, 1, 4, 6), (5, 7, 8))
        truth = generate_coefficients(design)
        for (i, j), triple in truth.triples.items():
            self.assertEqual(len(set(triple) - {i, j}), 3)

    def test_explicit_triple_collisions_are_replaced(self):
        design = SimDesign(n=6, T=2, groups=1, triples=((1, 2, 3),))
        self.assertEqual(pair_triple(design, 0, 1, 2), (3, 4, 5))
        self.assertEqual(pair_triple(design, 0, 4, 5), (1, 2, 3))

    def test_width_is_checked(self):
        with self.assertRaises(DataError):
            GroundTruth(n=5, blocks={(1, 2): CoefficientBlock.zeros(design_width(6))})


class TestForwardSample(unittest.TestCase):
    def test_deterministic_for_a_seed(self):
        design = SimDesign(n=6, T=10, seed=3)
        first, _ = simulate(design)
        second, _ = simulate(design)
        other, _ = simulate(SimDesign(n=6, T=10, seed=4))
        self.assertEqual(first, second)
        self.assertNotEqual(first, other)
        self.assertEqual(first.y.shape, (10, 6, 6))
        self.assertFalse(first.y[:, np.arange(6), np.arange(6)].any())

    def test_uniform_density(self):
        design = SimDesign(n=10, T=500, seed=5, alpha_sd=0.0, **NULL_EFFECTS)
        series, _ = simulate(design)
        links = 500 * 90
        share = series.y.sum() / links
        self.assertLess(abs(share - 0.5), 4 * np.sqrt(0.25 / links))

    def test_very_negative_intercepts_give_sparse_networks(self):
        design = SimDesign(n=6, T=50, seed=6, alpha_mean=-10.0, alpha_sd=0.0, **NULL_EFFECTS)
        series, _ = simulate(design)
        self.assertLess(series.y.sum(), 0.01 * 50 * 30)

    def test_outcome_frequencies_match_the_model(self):
        alpha = (0.5, -0.5, 0.2)
        design = SimDesign(n=5, T=2000, seed=7, alpha_mean=alpha, alpha_sd=0.0, **NULL_EFFECTS)
        series, _ = simulate(design)
        observed = np.bincount(dyad_outcomes(series, 1, 2), minlength=4)
        expected = np.array(outcome_probs(np.array(alpha))) * series.T
        self.assertGreater(chisquare(observed, expected).pvalue, 1e-3)

    def test_size_mismatch(self):
        truth = generate_coefficients(SimDesign(n=6, T=2))
        with self.assertRaises(ConfigError):
            forward_sample(truth, SimDesign(n=7, T=2))


class TestSupportRecovery(unittest.TestCase):
    def setUp(self):
        self.series, self.truth = simulate(SimDesign(n=6, T=40, seed=8))

    def test_truth_recovers_itself(self):
        report = support_recovery(self.truth, self.truth.blocks, self.series)
        self.assertEqual(report.recall, 1.0)
        self.assertEqual(report.false_selection, 0.0)
        self.assertEqual(report.true_positions, 15 * 3 * 5)
        self.assertEqual(report.selected, report.true_positions)

    def test_empty_estimate(self):
        blocks = {pair: CoefficientBlock.zeros(design_width(6)) for pair in self.truth.blocks}
        report = support_recovery(self.truth, blocks, self.series)
        self.assertEqual((report.recall, report.false_selection, report.selected), (0.0, 0.0, 0))

    def test_missing_pair(self):
        blocks = dict(self.truth.blocks)
        del blocks[(1, 2)]
        with self.assertRaises(MissingFitError):
            support_recovery(self.truth, blocks, self.series)


@unittest.skipUnless(os.environ.get("AUTOLOGIT_SLOW_TESTS"), "set AUTOLOGIT_SLOW_TESTS=1 to run")
class TestSelectionRecovery(unittest.TestCase):
    """Ten nodes, 400 slices, the default design, five seeds."""

    SEEDS = range(5)
    HOLDOUT = 5
    WORKERS = cpu_count()

    def test_recovery_and_predictive_ordering(self):
        grid = LambdaGrid.log_spaced(2.5, 18.0, 10)
        recalls, strays = [], []
        for seed in self.SEEDS:
            series, truth = simulate(SimDesign(n=10, T=400, seed=seed))
            path = bic_path(series, grid, FitConfig(), workers=self.WORKERS)
            report = support_recovery(truth, path.selected.batch.fits, series)
            recalls.append(report.recall)
            strays.append(report.false_selection)

            evaluation = rolling_evaluation(
                series,
                FitConfig(lam=path.selected_lambda),
                holdout=self.HOLDOUT,
                workers=self.WORKERS,
                true_blocks=truth.blocks,
            )
            self.assertEqual(len(evaluation.origins), self.HOLDOUT)
            for origin in evaluation.origins:
                self.assertGreaterEqual(origin.auc, 0.55, (seed, origin.origin))
                self.assertGreaterEqual(origin.true_auc, origin.auc - 0.05, (seed, origin.origin))
        self.assertGreaterEqual(float(np.mean(recalls)), 0.6, recalls)
        self.assertLessEqual(float(np.mean(strays)), 0.4, strays)


if __name__ == "__main__":
    unittest.main()
