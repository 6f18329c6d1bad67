import unittest

import numpy as np

from src.app.matcore.models.matrices import CovarianceMatrix, Definiteness
from src.app.matcore.services.linalg import (
    inverse_spd,
    log_det,
    normalized_trace,
    solve_spd,
    spectral_decompose,
)
from src.app.shared.domain.exceptions import (
    DimensionMismatchError,
    SingularMatrixError,
)


def random_spd(n: int, seed: int) -> CovarianceMatrix:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, 2 * n))
    return CovarianceMatrix(
        entries=a @ a.T / (2 * n), definiteness=Definiteness.DEFINITE
    )


class CovarianceMatrixTests(unittest.TestCase):
    def test_entries_are_symmetrized(self):
        matrix = CovarianceMatrix(entries=[[1.0, 2.0], [0.0, 1.0]])
        self.assertEqual(matrix.entries[0, 1], matrix.entries[1, 0])
        self.assertEqual(matrix.entries[0, 1], 1.0)

    def test_entries_are_read_only(self):
        matrix = CovarianceMatrix.identity(3)
        with self.assertRaises(ValueError):
            matrix.entries[0, 0] = 2.0

    def test_non_square_rejected(self):
        with self.assertRaises(DimensionMismatchError):
            CovarianceMatrix(entries=np.ones((2, 3)))

    def test_definite_tag_rejects_indefinite(self):
        with self.assertRaises(SingularMatrixError):
            CovarianceMatrix(
                entries=np.diag([1.0, -1.0]), definiteness=Definiteness.DEFINITE
            )

    def test_semidefinite_tag_accepts_zero_eigenvalue(self):
        matrix = CovarianceMatrix(
            entries=[[1.0, 1.0], [1.0, 1.0]], definiteness=Definiteness.SEMIDEFINITE
        )
        self.assertEqual(matrix.dim, 2)


class SpectralDecomposeTests(unittest.TestCase):
    def test_identity(self):
        decomposition = spectral_decompose(CovarianceMatrix.identity(3))
        np.testing.assert_allclose(decomposition.eigenvalues, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(decomposition.reconstruct(), np.eye(3), atol=1e-12)

    def test_diagonal_sorted_ascending(self):
        decomposition = spectral_decompose(CovarianceMatrix.diagonal([2.0, 1.0]))
        np.testing.assert_allclose(decomposition.eigenvalues, [1.0, 2.0])

    def test_reconstruction_and_orthonormality(self):
        matrix = random_spd(50, seed=3)
        decomposition = spectral_decompose(matrix)
        v = decomposition.eigenvectors
        lambda_max = decomposition.eigenvalues[-1]
        self.assertLessEqual(np.max(np.abs(v.T @ v - np.eye(50))), 1e-10)
        self.assertLessEqual(
            np.max(np.abs(decomposition.reconstruct() - matrix.entries)),
            1e-8 * lambda_max,
        )

    def test_deterministic(self):
        matrix = random_spd(20, seed=4)
        first = spectral_decompose(matrix)
        second = spectral_decompose(matrix)
        np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)


class TraceAndLogDetTests(unittest.TestCase):
    def test_normalized_trace(self):
        self.assertEqual(normalized_trace(CovarianceMatrix.identity(7)), 1.0)
        self.assertEqual(normalized_trace(CovarianceMatrix.diagonal([2.0, 4.0])), 3.0)

    def test_trace_invariant_under_conjugation(self):
        decomposition = spectral_decompose(random_spd(30, seed=5))
        rebuilt = CovarianceMatrix(entries=decomposition.reconstruct())
        self.assertAlmostEqual(
            normalized_trace(rebuilt), float(np.mean(decomposition.eigenvalues)), 10
        )

    def test_log_det_examples(self):
        self.assertEqual(log_det(CovarianceMatrix.identity(5)), 0.0)
        self.assertAlmostEqual(
            log_det(CovarianceMatrix.diagonal([2.0, 2.0])), 1.3862943611198906, 12
        )

    def test_log_det_matches_eigenvalues(self):
        matrix = random_spd(100, seed=6)
        eigenvalues = spectral_decompose(matrix).eigenvalues
        self.assertAlmostEqual(log_det(matrix), float(np.sum(np.log(eigenvalues))), 6)

    def test_log_det_singular(self):
        with self.assertRaises(SingularMatrixError) as context:
            log_det(CovarianceMatrix(entries=[[1.0, 1.0], [1.0, 1.0]]))
        self.assertEqual(context.exception.message, "singular or indefinite matrix")


class SolveTests(unittest.TestCase):
    def test_identity_returns_rhs(self):
        rhs = np.arange(6.0).reshape(3, 2)
        np.testing.assert_allclose(solve_spd(CovarianceMatrix.identity(3), rhs), rhs)

    def test_diagonal(self):
        result = solve_spd(CovarianceMatrix.diagonal([2.0, 4.0]), np.eye(2))
        np.testing.assert_allclose(result, np.diag([0.5, 0.25]))

    def test_residual(self):
        matrix = random_spd(50, seed=7)
        inverse = inverse_spd(matrix)
        self.assertLessEqual(
            np.max(np.abs(matrix.entries @ inverse.entries - np.eye(50))), 1e-8
        )

    def test_rows_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            solve_spd(CovarianceMatrix.identity(3), np.eye(2))

    def test_indefinite(self):
        with self.assertRaises(SingularMatrixError):
            solve_spd(CovarianceMatrix.diagonal([1.0, -2.0]), np.eye(2))
