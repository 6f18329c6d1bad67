import unittest

import numpy as np

from src.app.analytics.services.closed_forms import oracle_kl_closed
from src.app.divergence.services.metrics import kl_normalized
from src.app.estimators.models.estimates import ShrinkageRegime
from src.app.estimators.services.rie import (
    linear_shrinkage,
    oracle_eigenvalues,
    oracle_estimator,
    shrinkage_r,
)
from src.app.matcore.models.matrices import CovarianceMatrix
from src.app.matcore.services.linalg import normalized_trace, spectral_decompose
from src.app.montecarlo.models.experiment import ExperimentConfig, Metric
from src.app.montecarlo.services.harness import run_cell
from src.app.sampling.models.specs import PopulationSpec, RngStream
from src.app.sampling.services.samplers import (
    sample_covariance,
    sample_gaussian_data,
    sample_inverse_wishart,
)
from src.app.shared.domain.exceptions import DimensionMismatchError, DomainError


def sample_pair(n: int, p: float, q: float, seed: int):
    stream = RngStream(master_seed=seed, stream_id=0)
    population = sample_inverse_wishart(PopulationSpec(n=n, p=p), stream.child(0))
    data = sample_gaussian_data(population, int(n / q), stream.child(2))
    return population, sample_covariance(data)


class OracleTests(unittest.TestCase):
    def test_oracle_eigenvalues_with_canonical_basis(self):
        population = CovarianceMatrix(entries=[[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(
            oracle_eigenvalues(np.eye(2), population), [2.0, 1.0]
        )

    def test_basis_shape_checked(self):
        with self.assertRaises(DimensionMismatchError):
            oracle_eigenvalues(np.eye(3), CovarianceMatrix.identity(2))

    def test_self_oracle(self):
        _, sample = sample_pair(30, 1.0, 0.5, seed=1)
        estimate = oracle_estimator(sample, sample)
        np.testing.assert_allclose(
            estimate.oracle_eigenvalues, estimate.sample_eigenvalues, atol=1e-10
        )

    def test_identity_population(self):
        _, sample = sample_pair(30, 1.0, 0.5, seed=2)
        estimate = oracle_estimator(sample, CovarianceMatrix.identity(30))
        np.testing.assert_allclose(estimate.matrix.entries, np.eye(30), atol=1e-10)

    def test_trace_preserved_with_singular_sample(self):
        population, sample = sample_pair(40, 1.0, 2.0, seed=3)
        estimate = oracle_estimator(sample, population)
        self.assertAlmostEqual(
            normalized_trace(estimate.matrix), normalized_trace(population), 10
        )

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            oracle_estimator(CovarianceMatrix.identity(2), CovarianceMatrix.identity(3))

    def test_oracle_is_frobenius_optimal(self):
        population, sample = sample_pair(60, 1.0, 1.0, seed=4)
        estimate = oracle_estimator(sample, population)
        basis = estimate.basis

        def error(eigenvalues: np.ndarray) -> float:
            rebuilt = (basis * eigenvalues) @ basis.T
            return float(np.sum((rebuilt - population.entries) ** 2))

        optimum = error(estimate.oracle_eigenvalues)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            perturbation = rng.uniform(-0.1, 0.1, size=60)
            perturbed = error(estimate.oracle_eigenvalues + perturbation)
            self.assertGreaterEqual(perturbed, optimum - 1e-12)

    def test_kl_close_to_closed_form(self):
        config = ExperimentConfig(
            n=200,
            q=1.0,
            p=1.0,
            replicates=10,
            seed=2025,
            metrics=(Metric.KL_ORACLE,),
        )
        record = run_cell(config, workers=1)
        self.assertAlmostEqual(
            record.summaries[Metric.KL_ORACLE].mean,
            oracle_kl_closed(1.0, 1.0).closed_form,
            delta=0.01,
        )

    def test_oracle_is_kl_optimal(self):
        rng = np.random.default_rng(1)
        for seed in range(10):
            population, sample = sample_pair(200, 1.0, 0.5, seed=seed)
            estimate = oracle_estimator(sample, population)
            basis = estimate.basis

            def kl(eigenvalues: np.ndarray) -> float:
                rebuilt = CovarianceMatrix(entries=(basis * eigenvalues) @ basis.T)
                return kl_normalized(population, rebuilt)

            optimum = kl(estimate.oracle_eigenvalues)
            for _ in range(20):
                # relative steps keep every eigenvalue positive
                factors = 1.0 + rng.uniform(-0.1, 0.1, size=200)
                perturbed = kl(estimate.oracle_eigenvalues * factors)
                self.assertGreaterEqual(perturbed, optimum - 1e-10)

    def test_frobenius_error_close_to_asymptote(self):
        config = ExperimentConfig(
            n=100,
            q=1.0,
            p=1.0,
            replicates=10,
            seed=2024,
            metrics=(Metric.FROBENIUS_ORACLE,),
        )
        record = run_cell(config, workers=1)
        self.assertAlmostEqual(
            record.summaries[Metric.FROBENIUS_ORACLE].mean, 0.5, delta=0.05
        )


class ShrinkageTests(unittest.TestCase):
    def test_finite_coefficient(self):
        self.assertAlmostEqual(shrinkage_r(1000, 1.0, 1.0).r, 1000 / 1999, 12)

    def test_asymptotic_coefficient(self):
        coefficient = shrinkage_r(1000, 1.0, 1.0, ShrinkageRegime.ASYMPTOTIC)
        self.assertEqual(coefficient.r, 0.5)
        self.assertEqual(coefficient.regime, ShrinkageRegime.ASYMPTOTIC)

    def test_out_of_domain(self):
        with self.assertRaises(DomainError):
            shrinkage_r(2, 10.0, 1.0)
        with self.assertRaises(DomainError):
            shrinkage_r(10, 0.0, 1.0)

    def test_full_intensity_keeps_sample(self):
        _, sample = sample_pair(20, 1.0, 0.5, seed=5)
        coefficient = shrinkage_r(1000, 1.0, 1.0).model_copy(update={"r": 1.0})
        np.testing.assert_allclose(
            linear_shrinkage(sample, coefficient).entries, sample.entries
        )

    def test_identity_fixed_point(self):
        shrunk = linear_shrinkage(
            CovarianceMatrix.identity(5), shrinkage_r(5, 1.0, 1.0)
        )
        np.testing.assert_allclose(shrunk.entries, np.eye(5), atol=1e-15)

    def test_eigenvalue_map(self):
        _, sample = sample_pair(20, 1.0, 0.5, seed=6)
        coefficient = shrinkage_r(20, 1.0, 0.5)
        shrunk = spectral_decompose(linear_shrinkage(sample, coefficient)).eigenvalues
        expected = 1.0 + coefficient.r * (spectral_decompose(sample).eigenvalues - 1.0)
        np.testing.assert_allclose(shrunk, expected, atol=1e-10)

    def test_oracle_follows_linear_shrinkage(self):
        n, replicates = 500, 16
        oracle = np.zeros(n)
        sample = np.zeros(n)
        for seed in range(replicates):
            population, covariance = sample_pair(n, 1.0, 1.0, seed=100 + seed)
            estimate = oracle_estimator(covariance, population)
            oracle += estimate.oracle_eigenvalues / replicates
            sample += estimate.sample_eigenvalues / replicates
        r = shrinkage_r(n, 1.0, 1.0).r
        # edge ranks excluded, 1% on each side
        bulk = slice(n // 100, n - n // 100)
        gap = np.abs(oracle[bulk] - (r * sample[bulk] + 1.0 - r))
        self.assertLess(float(np.max(gap)), 0.15)
