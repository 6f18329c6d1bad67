import numpy as np

from src.app.divergence.models.divergence import DivergenceResult
from src.app.matcore.models.matrices import CovarianceMatrix
from src.app.matcore.services.linalg import (
    cholesky_factor,
    log_det_from_factor,
    solve_from_factor,
)
from src.app.shared.domain.exceptions import DimensionMismatchError


def _check_pair(population: CovarianceMatrix, estimate: CovarianceMatrix) -> None:
    if population.dim != estimate.dim:
        raise DimensionMismatchError(
            f"cannot compare a {population.dim}-dimensional matrix with a "
            f"{estimate.dim}-dimensional one"
        )


def kl_gaussian(population: CovarianceMatrix, estimate: CovarianceMatrix) -> float:
    """
    KL(C || S) = 1/2 (Tr(S^-1 C) + log(det S / det C) - n) between centered
    Gaussians. Both matrices must be positive definite; a singular S is the
    signature of a sample covariance taken with q >= 1.

    Round-off may leave the value marginally below zero, it is not clamped.
    """
    _check_pair(population, estimate)
    estimate_factor = cholesky_factor(estimate)
    population_factor = cholesky_factor(population)
    trace_term = float(np.trace(solve_from_factor(estimate_factor, population.entries)))
    log_ratio = log_det_from_factor(estimate_factor) - log_det_from_factor(
        population_factor
    )
    return 0.5 * (trace_term + log_ratio - population.dim)


def kl_normalized(population: CovarianceMatrix, estimate: CovarianceMatrix) -> float:
    return kl_gaussian(population, estimate) / population.dim


def frobenius_error(population: CovarianceMatrix, estimate: CovarianceMatrix) -> float:
    """tau((S - C)^2) = (1/n) sum_ij (S_ij - C_ij)^2"""
    _check_pair(population, estimate)
    difference = estimate.entries - population.entries
    return float(np.sum(difference * difference)) / population.dim


def divergence(
    population: CovarianceMatrix, estimate: CovarianceMatrix
) -> DivergenceResult:
    kl = kl_gaussian(population, estimate)
    return DivergenceResult(
        dim=population.dim,
        kl=kl,
        kl_normalized=kl / population.dim,
        frobenius=frobenius_error(population, estimate),
    )
