"""
Unit Tests for Experiment Runner
================================
"""

import json
import tempfile
import unittest
from unittest.mock import patch
import sys
from pathlib import Path

import pandas as pd

# Add src directory to path
script_dir = Path(__file__).parent
project_root = script_dir.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from config_manager import Config, ConfigError
from experiment_runner import (
    SUMMARY_COLUMNS, ExperimentConfig, build_dataset, cmd_centrality, cmd_generate, cmd_run, replicas_for,
)

SMALL_RUN = [
    "dataset.kind=synth-load",
    "dataset.n_samples=600",
    "dataset.noise_std=0.05",
    "dataset.seed=3",
    "reservoir.connectivity=0.3",
    "experiment.reservoir_sizes=[20]",
    'experiment.measures=["C2"]',
    "experiment.n_reps=1",
    "evaluation.horizon=5",
    "pruning.step=2",
    "pruning.max_prune_fraction=0.2",
]


def small_config(output_dir, *extra):
    config = Config()
    for assignment in SMALL_RUN + list(extra):
        config.apply_override(assignment)
    config.set("paths.output_dir", str(output_dir))
    return ExperimentConfig.from_config(config)


class TestExperimentConfig(unittest.TestCase):
    """Test cases for typed configuration"""

    def test_from_defaults(self):
        ecfg = ExperimentConfig.from_config(Config())
        self.assertEqual(ecfg.reservoir_sizes, (200, 300))
        self.assertEqual(ecfg.n_reps, 10)
        self.assertEqual(ecfg.hp.horizon, 84)
        self.assertEqual(ecfg.prune.eval_stride, 5)
        self.assertEqual(ecfg.hp.input_bias, 0.2)
        self.assertEqual(ecfg.hp.ridge_lambda, 1e-6)

    def test_invalid_config(self):
        config = Config()
        config.set("experiment.n_reps", 0)
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_config(config)

    def test_replica_seeds(self):
        with tempfile.TemporaryDirectory() as tmp:
            ecfg = small_config(tmp, "experiment.n_reps=3", 'experiment.measures=["C1", "C2"]')
        replicas = replicas_for(ecfg)
        self.assertEqual(len(replicas), 6)
        self.assertEqual([r.seed for r in replicas[:3]], [42, 43, 44])
        self.assertEqual([r.measure for r in replicas], ["C1"] * 3 + ["C2"] * 3)

    def test_unknown_dataset_kind(self):
        with self.assertRaises(ValueError):
            build_dataset({"kind": "weather"}, Config().get("splits"))


class TestCommands(unittest.TestCase):
    """Test cases for generate and centrality"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_generate_mackey_glass(self):
        config = Config()
        config.set("paths.output_dir", str(self.dir))
        path, info = cmd_generate(ExperimentConfig.from_config(config))
        self.assertEqual(path, self.dir / "mackey_glass.csv")
        self.assertEqual(len(pd.read_csv(path)), 10000)
        self.assertEqual(info["length"], 10000)
        self.assertEqual(info["splits"]["test"], [9000, 10000])

    def test_generate_synth_load_is_reproducible(self):
        ecfg = small_config(self.dir, "dataset.n_samples=5000", "dataset.seed=1")
        a, _ = cmd_generate(ecfg, self.dir / "a.csv")
        b, _ = cmd_generate(ecfg, self.dir / "b.csv")
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_centrality_generated_and_loaded(self):
        ecfg = small_config(self.dir)
        saved = self.dir / "reservoir.json"
        first = cmd_centrality(ecfg, self.dir / "generated.csv", size=15, seed=4, save_path=saved)
        second = cmd_centrality(ecfg, self.dir / "loaded.csv", reservoir_path=saved)
        self.assertEqual(len(pd.read_csv(first)), 15 * 5)
        self.assertEqual(first.read_bytes(), second.read_bytes())


class TestRun(unittest.TestCase):
    """Test cases for the full experiment run"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_single_replica_outputs(self):
        out = self.dir / "run"
        result = cmd_run(small_config(out))
        self.assertEqual(result.n_failed, 0)
        self.assertEqual(sorted(p.name for p in out.glob("curve_*.csv")), ["curve_20_C2_42.csv"])
        self.assertTrue((out / "mean_curve_20_C2.csv").exists())

        summary = pd.read_csv(out / "summary.csv")
        self.assertEqual(list(summary.columns), SUMMARY_COLUMNS)
        self.assertEqual(len(summary), 1)
        self.assertEqual(int(summary.loc[0, "initial_n"]), 20)

        doc = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        self.assertEqual(doc["best_measure"], {"20": "C2"})
        self.assertEqual(doc["rows"][0]["per_seed"]["optimal_nrmse"]["n_reps"], 1)

        self.assertIn("| C2 | 20 (", (out / "summary.md").read_text(encoding="utf-8"))

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        self.assertEqual(manifest["library_version"], "0.1.0")
        self.assertIn("wall_clock_seconds", manifest)
        self.assertEqual(manifest["config"]["evaluation"]["horizon"], 5)

    def test_curve_summary_written_next_to_curve(self):
        out = self.dir / "run"
        cmd_run(small_config(out))
        self.assertEqual(sorted(p.name for p in out.glob("curve_*.json")), ["curve_20_C2_42.json"])

        doc = json.loads((out / "curve_20_C2_42.json").read_text(encoding="utf-8"))
        for key in ("baseline", "optimal_n", "optimal_test_nrmse", "smallest_n"):
            self.assertIn(key, doc)
        self.assertEqual(doc["baseline"]["n"], 20)
        self.assertEqual(doc["measure"], "C2")

        curve = pd.read_csv(out / "curve_20_C2_42.csv")
        self.assertIn(doc["optimal_n"], curve["n_remaining"].tolist())
        self.assertAlmostEqual(doc["baseline"]["test_nrmse"], float(curve.loc[0, "test_nrmse"]), places=9)

    def test_rerun_gives_identical_summary(self):
        cmd_run(small_config(self.dir / "a"))
        cmd_run(small_config(self.dir / "b"))
        self.assertEqual((self.dir / "a" / "summary.csv").read_bytes(), (self.dir / "b" / "summary.csv").read_bytes())

    def test_seed_average_and_best_measure(self):
        out = self.dir / "multi"
        result = cmd_run(small_config(out, "experiment.n_reps=2", 'experiment.measures=["C2", "C3"]'))
        self.assertEqual(len(list(out.glob("curve_*.csv"))), 4)
        self.assertEqual(len(result.summary["rows"]), 2)
        self.assertIn(result.summary["best_measure"]["20"], ("C2", "C3"))
        mean = pd.read_csv(out / "mean_curve_20_C3.csv")
        self.assertEqual(int(mean["n_seeds"].max()), 2)
        self.assertEqual(mean["n_remaining"].tolist(), [20, 18, 16])

    def test_plot_is_written_when_enabled(self):
        out = self.dir / "plotted"
        cmd_run(small_config(out, "experiment.plot=true"))
        self.assertTrue((out / "figures" / "prune_curves.svg").exists())

    def test_worker_pool_matches_serial(self):
        extra = ("experiment.n_reps=2",)
        cmd_run(small_config(self.dir / "serial", *extra))
        cmd_run(small_config(self.dir / "pool", *extra, "experiment.workers=2"))
        self.assertEqual(
            (self.dir / "serial" / "summary.csv").read_bytes(), (self.dir / "pool" / "summary.csv").read_bytes()
        )

    def test_failed_replicas_are_counted(self):
        out = self.dir / "failing"
        with patch("experiment_runner.prune_sweep", side_effect=RuntimeError("boom")):
            result = cmd_run(small_config(out))
        self.assertEqual(result.n_failed, 1)
        self.assertEqual(len(result.summary["failed_replicas"]), 1)
        self.assertIn("boom", result.summary["failed_replicas"][0]["error"])
        self.assertTrue((out / "manifest.json").exists())


if __name__ == '__main__':
    unittest.main()
