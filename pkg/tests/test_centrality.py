"""
Unit Tests for Centrality Measures
==================================
"""

import tempfile
import unittest
import sys
from pathlib import Path

import numpy as np
import pandas as pd

# Add src directory to path
script_dir = Path(__file__).parent
project_root = script_dir.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from centrality import MEASURES, CentralityScores, centrality, export_scores, rank_nodes, signed_strengths


def edge_list_oracle(w):
    """Brute-force scores from the explicit edge list (edge c -> r for w[r, c])"""
    n = w.shape[0]
    in_pos, in_neg, out_pos, out_neg = ([0.0] * n for _ in range(4))
    for r in range(n):
        for c in range(n):
            weight = w[r, c]
            if weight > 0:
                in_pos[r] += weight
                out_pos[c] += weight
            elif weight < 0:
                in_neg[r] += -weight
                out_neg[c] += -weight

    def ratio(num, den):
        return num / den if den > 0 else 0.0

    return {
        "C_in": [in_pos[i] + in_neg[i] for i in range(n)],
        "C_out": [out_pos[i] + out_neg[i] for i in range(n)],
        "C1": [ratio(in_pos[i] - in_neg[i], in_pos[i] + in_neg[i]) for i in range(n)],
        "C2": [
            ratio(in_pos[i] + out_pos[i] - in_neg[i] - out_neg[i], in_pos[i] + out_pos[i] + in_neg[i] + out_neg[i])
            for i in range(n)
        ],
        "C3": [in_pos[i] + out_pos[i] + in_neg[i] + out_neg[i] for i in range(n)],
    }


class TestCentrality(unittest.TestCase):
    """Test cases for centrality measures"""

    def setUp(self):
        self.w = np.array([[0.0, 0.5], [-0.3, 0.2]])

    def test_signed_strengths(self):
        s = signed_strengths(self.w)
        np.testing.assert_allclose(s.in_pos, [0.5, 0.2])
        np.testing.assert_allclose(s.in_neg, [0.0, 0.3])
        np.testing.assert_allclose(s.out_pos, [0.0, 0.7])
        np.testing.assert_allclose(s.out_neg, [0.3, 0.0])

    def test_hand_computed_measures(self):
        np.testing.assert_allclose(centrality(self.w, "C_in").scores, [0.5, 0.5])
        np.testing.assert_allclose(centrality(self.w, "C_out").scores, [0.3, 0.7])
        np.testing.assert_allclose(centrality(self.w, "C1").scores, [1.0, -0.2])
        np.testing.assert_allclose(centrality(self.w, "C2").scores, [0.25, 0.5])
        np.testing.assert_allclose(centrality(self.w, "C3").scores, [0.8, 1.2])

    def test_self_loop_counts_both_ways(self):
        scores = centrality(np.array([[0.4]]), "C3").scores
        self.assertAlmostEqual(scores[0], 0.8)

    def test_isolated_node_balance_is_zero(self):
        w = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.3], [0.0, -0.1, 0.0]])
        self.assertEqual(centrality(w, "C1").scores[0], 0.0)
        self.assertEqual(centrality(w, "C2").scores[0], 0.0)

    def test_matches_edge_list_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            w = rng.uniform(-1.0, 1.0, size=(n, n))
            w[rng.random((n, n)) < 0.4] = 0.0
            expected = edge_list_oracle(w)
            scores = {m: centrality(w, m).scores for m in MEASURES}
            for measure in MEASURES:
                np.testing.assert_allclose(scores[measure], expected[measure], rtol=0, atol=1e-12)
            np.testing.assert_allclose(scores["C_in"] + scores["C_out"], scores["C3"], rtol=0, atol=1e-12)

    def test_scaling_behaviour(self):
        rng = np.random.default_rng(5)
        w = rng.uniform(-1.0, 1.0, size=(6, 6))
        np.testing.assert_array_equal(centrality(2.0 * w, "C1").scores, centrality(w, "C1").scores)
        np.testing.assert_array_equal(centrality(2.0 * w, "C3").scores, 2.0 * centrality(w, "C3").scores)

    def test_sign_flip(self):
        rng = np.random.default_rng(12)
        w = rng.uniform(-1.0, 1.0, size=(7, 7))
        w[rng.random((7, 7)) < 0.3] = 0.0
        for measure in ("C1", "C2"):
            np.testing.assert_allclose(centrality(-w, measure).scores, -centrality(w, measure).scores, atol=1e-15)
        np.testing.assert_allclose(centrality(-w, "C3").scores, centrality(w, "C3").scores, rtol=1e-14, atol=0)

    def test_strength_totals_match_weight_mass(self):
        rng = np.random.default_rng(13)
        w = rng.uniform(-1.0, 1.0, size=(9, 9))
        total = np.sum(np.abs(w))
        self.assertAlmostEqual(np.sum(centrality(w, "C_in").scores), total, delta=1e-12 * total)
        self.assertAlmostEqual(np.sum(centrality(w, "C_out").scores), total, delta=1e-12 * total)

    def test_three_node_example(self):
        w = np.array([[0.0, 0.2, -0.1], [0.3, 0.0, 0.0], [0.0, -0.5, 0.0]])
        scores = centrality(w, "C3")
        np.testing.assert_allclose(scores.scores, [0.6, 1.0, 0.6], atol=1e-12)
        self.assertEqual(rank_nodes(scores), [0, 2, 1])

    def test_unknown_measure(self):
        with self.assertRaises(ValueError):
            centrality(self.w, "C4")

    def test_non_square(self):
        with self.assertRaises(ValueError):
            centrality(np.ones((2, 3)), "C_in")


class TestRanking(unittest.TestCase):
    """Test cases for node ranking"""

    def test_ties_break_by_index(self):
        scores = CentralityScores(measure="C3", scores=np.array([1.0, 0.0, 1.0, 0.0]))
        self.assertEqual(rank_nodes(scores), [1, 3, 0, 2])

    def test_exclude(self):
        scores = CentralityScores(measure="C3", scores=np.array([1.0, 0.0, 1.0, 0.0]))
        self.assertEqual(rank_nodes(scores, exclude=[3, 0]), [1, 2])

    def test_by_magnitude_only_for_balance_measures(self):
        balance = CentralityScores(measure="C2", scores=np.array([-0.9, 0.1, 0.5]))
        self.assertEqual(rank_nodes(balance), [0, 1, 2])
        self.assertEqual(rank_nodes(balance, by_magnitude=True), [1, 2, 0])
        strength = CentralityScores(measure="C3", scores=np.array([3.0, 1.0, 2.0]))
        self.assertEqual(rank_nodes(strength, by_magnitude=True), [1, 2, 0])


class TestExport(unittest.TestCase):
    """Test cases for score export"""

    def test_export_scores(self):
        w = np.array([[0.0, 0.5, 0.0], [-0.3, 0.2, 0.1], [0.0, 0.0, 0.0]])
        with tempfile.TemporaryDirectory() as tmp:
            path = export_scores(w, Path(tmp) / "scores.csv")
            table = pd.read_csv(path)
        self.assertEqual(list(table.columns), ["node_id", "measure", "score"])
        self.assertEqual(len(table), 3 * len(MEASURES))
        c3 = table.loc[table["measure"] == "C3", "score"].tolist()
        np.testing.assert_allclose(c3, [0.8, 1.3, 0.1])


if __name__ == '__main__':
    unittest.main()
