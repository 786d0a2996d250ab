"""
Unit Tests for Linear Algebra Kernel
====================================
"""

import unittest
from unittest.mock import patch
import sys
from pathlib import Path

import numpy as np

# Add src directory to path
script_dir = Path(__file__).parent
project_root = script_dir.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from linalg import (
    IllConditionedError, SpectralRadiusError, as_matrix, as_vector, frozen, matvec, power_growth_radius,
    ridge_solve, spectral_radius,
)


def charpoly_radius(m):
    """Largest root modulus of the characteristic polynomial (Faddeev-LeVerrier coefficients)"""
    n = m.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(m)
    c = 1.0
    for k in range(1, n + 1):
        mk = m @ mk + c * np.eye(n)
        c = -np.trace(m @ mk) / k
        coeffs.append(c)
    return float(np.max(np.abs(np.roots(coeffs))))


class TestMatrices(unittest.TestCase):
    """Test cases for matrix helpers"""

    def test_matvec(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        np.testing.assert_array_equal(matvec(m, np.array([1.0, -1.0])), [-1.0, -1.0, -1.0])

    def test_matvec_is_linear(self):
        rng = np.random.default_rng(8)
        m = rng.uniform(-1.0, 1.0, size=(6, 4))
        x, y = rng.uniform(-1.0, 1.0, size=(2, 4))
        np.testing.assert_allclose(
            matvec(m, 0.7 * x - 1.3 * y), 0.7 * matvec(m, x) - 1.3 * matvec(m, y), rtol=0, atol=1e-12
        )

    def test_matvec_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            matvec(np.ones((2, 3)), np.ones(2))

    def test_as_matrix_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            as_matrix([[1.0, np.nan]])
        with self.assertRaises(ValueError):
            as_matrix([1.0, 2.0])

    def test_as_vector_scalar(self):
        self.assertEqual(as_vector(3.0).shape, (1,))

    def test_frozen_is_read_only_copy(self):
        source = np.zeros((2, 2))
        out = frozen(source)
        source[0, 0] = 5.0
        self.assertEqual(out[0, 0], 0.0)
        with self.assertRaises(ValueError):
            out[0, 0] = 1.0


class TestRidgeSolve(unittest.TestCase):
    """Test cases for ridge regression"""

    def setUp(self):
        rng = np.random.default_rng(0)
        self.design = rng.standard_normal((40, 5))
        self.coef = np.array([[1.0], [-2.0], [0.5], [0.0], [3.0]])
        self.targets = self.design @ self.coef

    def test_recovers_exact_coefficients(self):
        beta = ridge_solve(self.design, self.targets, 0.0)
        np.testing.assert_allclose(beta, self.coef, atol=1e-10)

    def test_matches_closed_form(self):
        lam = 0.7
        expected = np.linalg.solve(self.design.T @ self.design + lam * np.eye(5), self.design.T @ self.targets)
        np.testing.assert_allclose(ridge_solve(self.design, self.targets, lam), expected, rtol=1e-10, atol=1e-12)

    def test_singular_without_penalty(self):
        design = np.column_stack([self.design[:, 0], self.design[:, 0]])
        with self.assertRaises(IllConditionedError):
            ridge_solve(design, self.targets, 0.0)

    def test_singular_is_linalg_error(self):
        self.assertTrue(issubclass(IllConditionedError, np.linalg.LinAlgError))

    def test_penalty_fixes_singular(self):
        design = np.column_stack([self.design[:, 0], self.design[:, 0]])
        beta = ridge_solve(design, self.targets, 1e-3)
        self.assertEqual(beta.shape, (2, 1))
        self.assertAlmostEqual(beta[0, 0], beta[1, 0], places=10)

    def test_invalid_inputs(self):
        with self.assertRaises(ValueError):
            ridge_solve(self.design, self.targets, -1.0)
        with self.assertRaises(ValueError):
            ridge_solve(self.design, self.targets[:10], 0.1)


class TestSpectralRadius(unittest.TestCase):
    """Test cases for spectral radius estimation"""

    def test_diagonal(self):
        self.assertAlmostEqual(spectral_radius(np.diag([0.5, -0.8, 0.1])), 0.8, places=12)

    def test_complex_pair(self):
        rotation = 0.7 * np.array([[0.0, -1.0], [1.0, 0.0]])
        self.assertAlmostEqual(spectral_radius(rotation), 0.7, places=12)

    def test_scales_with_absolute_factor(self):
        rng = np.random.default_rng(4)
        m = rng.uniform(-1.0, 1.0, size=(8, 8))
        for factor in (-2.5, 0.3, 7.0):
            self.assertAlmostEqual(spectral_radius(factor * m) / (abs(factor) * spectral_radius(m)), 1.0, delta=1e-6)

    def test_matches_characteristic_polynomial(self):
        rng = np.random.default_rng(31)
        for n in range(2, 6):
            for _ in range(20):
                m = rng.uniform(-1.0, 1.0, size=(n, n))
                np.testing.assert_allclose(spectral_radius(m), charpoly_radius(m), rtol=1e-6)

    def test_zero_and_empty(self):
        self.assertEqual(spectral_radius(np.zeros((3, 3))), 0.0)
        self.assertEqual(spectral_radius(np.zeros((0, 0))), 0.0)

    def test_non_square(self):
        with self.assertRaises(ValueError):
            spectral_radius(np.ones((2, 3)))

    def test_power_growth_handles_rotation(self):
        rotation = 0.7 * np.array([[0.0, -1.0], [1.0, 0.0]])
        self.assertAlmostEqual(power_growth_radius(rotation), 0.7, places=9)

    def test_non_convergence_reports_estimate(self):
        m = np.diag([0.5, 0.3])
        with patch("numpy.linalg.eigvals", side_effect=np.linalg.LinAlgError("no convergence")):
            with self.assertRaises(SpectralRadiusError) as ctx:
                spectral_radius(m)
        self.assertAlmostEqual(ctx.exception.estimate, 0.5, delta=0.01)


if __name__ == '__main__':
    unittest.main()
