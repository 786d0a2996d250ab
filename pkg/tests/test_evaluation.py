"""
Unit Tests for Prediction Error Metrics
=======================================
"""

import math
import unittest
import sys
from pathlib import Path

import numpy as np

# Add src directory to path
script_dir = Path(__file__).parent
project_root = script_dir.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from evaluation import Metric, aggregate, forecast_origins, nrmse, score_horizon
from readout import TrainedEsn
from reservoir import HyperParams, drive, generate_reservoir


class TestNrmse(unittest.TestCase):
    """Test cases for NRMSE"""

    def setUp(self):
        self.target = np.array([0.5, 1.25, -0.75, 2.0, 0.0, 1.5])

    def test_perfect_prediction(self):
        self.assertEqual(nrmse(self.target, self.target, 1.0).nrmse, 0.0)

    def test_mean_predictor_scores_one(self):
        mean = np.full_like(self.target, self.target.mean())
        metric = nrmse(mean, self.target, float(np.var(self.target)))
        self.assertAlmostEqual(metric.nrmse, 1.0, delta=1e-12)
        self.assertEqual(metric.n_points, 6)

    def test_shift_invariance(self):
        pred = self.target + np.array([0.25, -0.5, 0.125, 0.0, 0.5, -0.25])
        a = nrmse(pred, self.target, 2.0).nrmse
        b = nrmse(pred + 4.0, self.target + 4.0, 2.0).nrmse
        self.assertEqual(a, b)

    def test_known_value(self):
        metric = nrmse([1.0, 2.0], [0.0, 0.0], 0.5)
        self.assertAlmostEqual(metric.nrmse, math.sqrt(5.0 / (2 * 0.5)))

    def test_errors(self):
        with self.assertRaises(ValueError):
            nrmse([1.0], [1.0, 2.0], 1.0)
        with self.assertRaises(ValueError):
            nrmse([], [], 1.0)
        with self.assertRaises(ValueError):
            nrmse([1.0], [1.0], 0.0)


class TestAggregate(unittest.TestCase):
    """Test cases for repetition statistics"""

    def test_statistics(self):
        stats = aggregate([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(stats.mean, 2.5)
        self.assertAlmostEqual(stats.std, math.sqrt(5.0 / 3.0), places=12)
        self.assertEqual((stats.min, stats.max, stats.n_reps), (1.0, 4.0, 4))

    def test_metrics_and_single_rep(self):
        stats = aggregate([Metric(nrmse=0.25, n_points=10)])
        self.assertEqual((stats.mean, stats.std), (0.25, 0.0))

    def test_order_independent(self):
        values = [0.1, 0.7, 0.30000000000000004, 1e-9, 0.2]
        self.assertEqual(aggregate(values), aggregate(list(reversed(values))))

    def test_empty(self):
        with self.assertRaises(ValueError):
            aggregate([])

    def test_to_dict(self):
        self.assertEqual(set(aggregate([1.0, 2.0]).to_dict()), {"mean", "std", "min", "max", "n_reps"})


class TestHorizonScoring(unittest.TestCase):
    """Test cases for free-run scoring over a split"""

    def setUp(self):
        self.hp = HyperParams(n_reservoir=10, seed=1, horizon=3)
        self.rw = generate_reservoir(self.hp)
        t = np.arange(200)
        self.series = np.sin(2 * np.pi * t / 17.0)
        self.states = drive(self.rw, self.series[:, None])
        # Readout that copies its input: a persistence forecast
        w_out = np.zeros((1, 12))
        w_out[0, 1] = 1.0
        self.model = TrainedEsn(reservoir=self.rw, w_out=w_out, hp=self.hp)

    def test_forecast_origins(self):
        np.testing.assert_array_equal(forecast_origins(range(100, 120), 5), np.arange(95, 115))
        np.testing.assert_array_equal(forecast_origins(range(100, 120), 5, stride=5), [95, 100, 105, 110])
        with self.assertRaises(ValueError):
            forecast_origins(range(2, 3), 5)

    def test_persistence_forecast_score(self):
        eval_range = range(150, 200)
        metric = score_horizon(self.model, self.series, self.states, eval_range, horizon=3)
        origins = np.arange(147, 197)
        expected = nrmse(self.series[origins], self.series[origins + 3], float(np.var(self.series[150:200])))
        self.assertAlmostEqual(metric.nrmse, expected.nrmse, places=12)
        self.assertEqual(metric.n_points, 50)

    def test_trajectory_score(self):
        eval_range = range(150, 200)
        metric = score_horizon(self.model, self.series, self.states, eval_range, horizon=3, trajectory=True)
        origins = np.arange(147, 197)
        preds = np.tile(self.series[origins], 3)
        truth = np.concatenate([self.series[origins + k] for k in (1, 2, 3)])
        expected = nrmse(preds, truth, float(np.var(self.series[150:200])))
        self.assertAlmostEqual(metric.nrmse, expected.nrmse, places=12)
        self.assertEqual(metric.n_points, 150)


if __name__ == '__main__':
    unittest.main()
