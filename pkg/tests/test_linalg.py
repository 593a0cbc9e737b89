"""Linear algebra test suite"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from dyncred.errors import DimensionMismatch, InvalidRho, NotPositiveDefinite, SingularUpdate
from dyncred.linalg import (
    ar1_toeplitz,
    ar1_toeplitz_inverse,
    last_column_inverse,
    ldl_factor,
    model1_dense_inverse,
    rank_one_update_solve,
    solve_spd,
    tridiag_star,
    tridiag_uv,
    woodbury_model1_inverse,
)
from dyncred.types import SymMatrix


class TestSolveSpd(unittest.TestCase):
    """Test the LDL^T solver"""

    def test_identity_and_scalar(self):
        np.testing.assert_allclose(solve_spd(np.eye(3), [1, 2, 3]), [1, 2, 3])
        np.testing.assert_allclose(solve_spd(2 * np.eye(2), [4, 6]), [2, 3])

    def test_ar1_tail_identity(self):
        """Sigma^-1 (rho^4, rho^3, rho^2, rho) = (0, 0, 0, rho)"""
        x = solve_spd(ar1_toeplitz(4, 0.5), [0.5 ** 4, 0.5 ** 3, 0.5 ** 2, 0.5])
        np.testing.assert_allclose(x, [0, 0, 0, 0.5], atol=1e-12)

    def test_residual_bound_random(self):
        rng = np.random.default_rng(7)
        for n in (1, 3, 8, 20):
            with self.subTest(n=n):
                B = rng.normal(size=(n, n))
                A = B @ B.T + n * np.eye(n)
                b = rng.normal(size=n)
                x = solve_spd(SymMatrix(A), b)
                self.assertLessEqual(np.max(np.abs(A @ x - b)), 1e-9 * (1 + np.max(np.abs(b))))

    def test_ldl_reconstructs(self):
        rng = np.random.default_rng(3)
        B = rng.normal(size=(5, 5))
        A = B @ B.T + np.eye(5)
        L, d = ldl_factor(A)
        np.testing.assert_allclose(L @ np.diag(d) @ L.T, A, atol=1e-10)
        np.testing.assert_allclose(np.diag(L), np.ones(5))

    def test_not_positive_definite(self):
        with self.assertRaises(NotPositiveDefinite):
            solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), [1.0, 1.0])
        with self.assertRaises(NotPositiveDefinite):
            solve_spd(np.ones((3, 3)), [1.0, 1.0, 1.0])

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            solve_spd(np.eye(3), [1.0, 2.0])
        with self.assertRaises(DimensionMismatch):
            solve_spd(np.ones((2, 3)), [1.0, 2.0])

    def test_symmatrix_validate(self):
        self.assertEqual(SymMatrix(np.eye(2)).validate(), [])
        self.assertTrue(SymMatrix(np.array([[1.0, 0.5], [0.0, 1.0]])).validate())


class TestAr1Toeplitz(unittest.TestCase):
    """Test AR(1) correlation matrices and their inverse"""

    def test_entries(self):
        np.testing.assert_allclose(ar1_toeplitz(2, 0.3).entries, [[1, 0.3], [0.3, 1]])
        np.testing.assert_allclose(ar1_toeplitz(3, 0.0).entries, np.eye(3))
        self.assertAlmostEqual(ar1_toeplitz(3, 0.5).entries[0, 2], 0.25)
        self.assertEqual(ar1_toeplitz(4, 0.2).dim, 4)

    def test_inverse_pattern(self):
        scaled = (1 - 0.25) * ar1_toeplitz_inverse(3, 0.5).entries
        np.testing.assert_allclose(np.diag(scaled), [1, 1.25, 1])
        np.testing.assert_allclose(np.diag(scaled, 1), [-0.5, -0.5])
        self.assertEqual(scaled[0, 2], 0.0)
        np.testing.assert_allclose(ar1_toeplitz_inverse(2, 0.0).entries, np.eye(2))

    def test_inverse_grid(self):
        for T in range(2, 11):
            for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
                with self.subTest(T=T, rho=rho):
                    product = ar1_toeplitz_inverse(T, rho).entries @ ar1_toeplitz(T, rho).entries
                    np.testing.assert_allclose(product, np.eye(T), atol=1e-12)
                    tail = rho ** np.arange(T, 0, -1)
                    expected = np.zeros(T)
                    expected[-1] = rho
                    np.testing.assert_allclose(
                        ar1_toeplitz_inverse(T, rho).entries @ tail, expected, atol=1e-12
                    )

    def test_invalid_rho(self):
        for rho in (1.0, -1.0, 1.5):
            with self.subTest(rho=rho):
                with self.assertRaises(InvalidRho):
                    ar1_toeplitz(3, rho)
                with self.assertRaises(InvalidRho):
                    ar1_toeplitz_inverse(3, rho)


class TestTridiagUv(unittest.TestCase):
    """Test the u/v recursions of the tridiagonal inverse"""

    def test_last_column_matches_dense_inverse(self):
        rng = np.random.default_rng(11)
        for rho in (0.6, -0.4, 0.95):
            with self.subTest(rho=rho):
                xi = rng.uniform(0.1, 10, size=5)
                dense = np.linalg.inv(tridiag_star(xi, rho).entries)
                uv = tridiag_uv(xi, rho)
                np.testing.assert_allclose(last_column_inverse(uv), dense[:, -1], rtol=1e-10)
                np.testing.assert_allclose(uv.v[-1] * uv.u, dense[:, -1], rtol=1e-10)

    def test_rho_zero(self):
        uv = tridiag_uv([0.5, 0.5, 0.5], 0.0)
        np.testing.assert_allclose(uv.d, [1.5, 1.5, 1.5])
        np.testing.assert_allclose(uv.delta, [1.5, 1.5, 1.5])
        np.testing.assert_allclose(last_column_inverse(uv), [0, 0, 1 / 1.5])

    def test_monotone_sequences(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            T = int(rng.integers(2, 10))
            xi = rng.uniform(0.01, 5, size=T)
            rho = float(rng.uniform(0.05, 0.95))
            uv = tridiag_uv(xi, rho)
            self.assertTrue(np.all(uv.d > 0) and np.all(uv.delta > 0))
            self.assertTrue(np.all(np.diff(uv.v) < 0))
            self.assertTrue(np.all(np.diff(uv.u) > 0))

    def test_woodbury_consistency(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            T = int(rng.integers(2, 8))
            sigma2 = float(rng.uniform(0.05, 3))
            rho = float(rng.uniform(0.0, 0.95))
            lam = rng.uniform(0.01, 10, size=T)
            q = lam * float(rng.uniform(0.05, 3))
            np.testing.assert_allclose(
                woodbury_model1_inverse(sigma2, rho, lam, q),
                model1_dense_inverse(sigma2, rho, lam, q),
                rtol=1e-8, atol=1e-10,
            )


class TestRankOneUpdate(unittest.TestCase):
    """Test the Sherman-Morrison solve"""

    def test_trivial_cases(self):
        np.testing.assert_allclose(rank_one_update_solve(np.eye(2), 0.0, [3, 4]), [3, 4])
        np.testing.assert_allclose(rank_one_update_solve(np.eye(2), 1.0, [1, 1]), [1 / 3, 1 / 3])

    def test_matches_dense_solve(self):
        M = ar1_toeplitz(3, 0.4).entries
        rhs = np.array([0.3, -1.2, 2.0])
        expected = np.linalg.solve(M + 0.7 * np.ones((3, 3)), rhs)
        np.testing.assert_allclose(rank_one_update_solve(M, 0.7, rhs), expected, rtol=1e-12)
        applier = lambda y: np.linalg.solve(M, y)  # noqa: E731
        np.testing.assert_allclose(rank_one_update_solve(applier, 0.7, rhs), expected, rtol=1e-12)

    def test_singular_update(self):
        with self.assertRaises(SingularUpdate):
            rank_one_update_solve(np.eye(2), -0.5, [1.0, 2.0])


if __name__ == '__main__':
    unittest.main()
