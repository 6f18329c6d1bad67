import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from src.app.matcore.models.matrices import (
    CovarianceMatrix,
    Definiteness,
    SpectralDecomposition,
)
from src.app.shared.domain.constants import EPS
from src.app.shared.domain.exceptions import (
    DimensionMismatchError,
    SingularMatrixError,
    SpectralDecompositionError,
)
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)


def spectral_decompose(matrix: CovarianceMatrix) -> SpectralDecomposition:
    """
    Symmetric eigendecomposition with eigenvalues sorted ascending.

    Ties keep the column order returned by the solver (stable sort), so the
    result only depends on the input bits. Eigenvalues of a SEMIDEFINITE
    matrix lying in (-n * eps * |lambda_max|, 0) are clamped to 0.
    """
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(matrix.entries)
    except np.linalg.LinAlgError as e:
        logger.error("eigh_error=%s dim=%s", e, matrix.dim)
        raise SpectralDecompositionError(dim=matrix.dim)

    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    if matrix.definiteness == Definiteness.SEMIDEFINITE:
        tolerance = matrix.dim * EPS * float(np.max(np.abs(eigenvalues)))
        eigenvalues = np.where(
            (eigenvalues < 0.0) & (eigenvalues > -tolerance), 0.0, eigenvalues
        )

    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def normalized_trace(matrix: CovarianceMatrix) -> float:
    """tau(M) = Tr(M) / n"""
    return float(np.trace(matrix.entries)) / matrix.dim


def cholesky_factor(matrix: CovarianceMatrix) -> tuple[NDArray[np.float64], bool]:
    try:
        return scipy.linalg.cho_factor(matrix.entries, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        raise SingularMatrixError()


def log_det_from_factor(factor: tuple[NDArray[np.float64], bool]) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor[0]))))


def solve_from_factor(
    factor: tuple[NDArray[np.float64], bool], rhs: NDArray[np.float64]
) -> NDArray[np.float64]:
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def log_det(matrix: CovarianceMatrix) -> float:
    """log det M through a Cholesky factorization; M must be positive definite."""
    return log_det_from_factor(cholesky_factor(matrix))


def solve_spd(
    matrix: CovarianceMatrix, rhs: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Solves M X = B for a positive definite M without forming M^-1."""
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape[0] != matrix.dim:
        raise DimensionMismatchError(
            f"right-hand side has {rhs.shape[0]} rows for a {matrix.dim}x{matrix.dim} matrix"
        )
    return solve_from_factor(cholesky_factor(matrix), rhs)


def inverse_spd(matrix: CovarianceMatrix) -> CovarianceMatrix:
    return CovarianceMatrix(entries=solve_spd(matrix, np.eye(matrix.dim)))
