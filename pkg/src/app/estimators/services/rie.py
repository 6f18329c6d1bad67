import numpy as np

from src.app.estimators.models.estimates import (
    OracleEstimate,
    ShrinkageCoefficient,
    ShrinkageRegime,
)
from src.app.matcore.models.matrices import CovarianceMatrix
from src.app.matcore.services.linalg import spectral_decompose
from src.app.shared.domain.constants import ORACLE_EIGENVALUE_FLOOR
from src.app.shared.domain.exceptions import (
    BrokenDecompositionError,
    DimensionMismatchError,
    DomainError,
)


def oracle_eigenvalues(
    basis: np.ndarray, population: CovarianceMatrix
) -> np.ndarray:
    """Lambda_O = diag(V^T C V), in the column order of V."""
    basis = np.asarray(basis, dtype=np.float64)
    if basis.shape != (population.dim, population.dim):
        raise DimensionMismatchError(
            f"basis {basis.shape} against a {population.dim}x{population.dim} population"
        )
    return np.einsum("ij,ij->j", basis, population.entries @ basis)


def oracle_estimator(
    sample: CovarianceMatrix, population: CovarianceMatrix
) -> OracleEstimate:
    """
    Xi(Lambda_O | E) = V Lambda_O V^T: the rotationally invariant estimator
    closest to C in Frobenius norm. E may be singular.
    """
    if sample.dim != population.dim:
        raise DimensionMismatchError(
            f"sample dimension {sample.dim} != population dimension {population.dim}"
        )
    decomposition = spectral_decompose(sample)
    cleaned = oracle_eigenvalues(decomposition.eigenvectors, population)
    if cleaned.min() < ORACLE_EIGENVALUE_FLOOR:
        raise BrokenDecompositionError(
            f"Oracle eigenvalue {cleaned.min():.3e} below {ORACLE_EIGENVALUE_FLOOR}"
        )
    return OracleEstimate(
        basis=decomposition.eigenvectors,
        sample_eigenvalues=decomposition.eigenvalues,
        oracle_eigenvalues=cleaned,
        matrix=CovarianceMatrix(entries=decomposition.reconstruct(cleaned)),
    )


def shrinkage_r(
    n: int,
    p: float,
    q: float,
    regime: ShrinkageRegime = ShrinkageRegime.FINITE,
) -> ShrinkageCoefficient:
    """
    Optimal linear shrinkage intensity under the white inverse Wishart prior:
    n p / (n (p + q) - p q) at finite n, p / (p + q) asymptotically.
    """
    if n < 1 or p <= 0 or q <= 0:
        raise DomainError(
            f"shrinkage needs n >= 1, p > 0, q > 0 (n={n}, p={p}, q={q})"
        )
    if regime == ShrinkageRegime.ASYMPTOTIC:
        r = p / (p + q)
    else:
        r = n * p / (n * (p + q) - p * q)
    if not 0.0 < r <= 1.0:
        raise DomainError(f"finite-n shrinkage r={r} outside (0, 1] (n={n}, p={p})")
    return ShrinkageCoefficient(r=r, regime=regime)


def linear_shrinkage(
    sample: CovarianceMatrix, coefficient: ShrinkageCoefficient
) -> CovarianceMatrix:
    """r (E - 1) + 1"""
    r = coefficient.r
    return CovarianceMatrix(
        entries=r * sample.entries + (1.0 - r) * np.eye(sample.dim)
    )
