from enum import StrEnum, auto

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.app.shared.domain.constants import EPS
from src.app.shared.domain.exceptions import DimensionMismatchError, SingularMatrixError


class Definiteness(StrEnum):
    UNCHECKED = auto()
    SEMIDEFINITE = auto()
    DEFINITE = auto()


class CovarianceMatrix(BaseModel):
    """
    Dense symmetric matrix. Entries are symmetrized as (A + A^T) / 2 on
    construction. A SEMIDEFINITE tag rejects a smallest eigenvalue below
    -n * eps * |lambda_max|, a DEFINITE tag requires a Cholesky factor.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray
    definiteness: Definiteness = Definiteness.UNCHECKED

    @field_validator("entries", mode="before")
    @classmethod
    def symmetrize(cls, value) -> np.ndarray:
        entries = np.asarray(value, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(
                f"covariance entries must be square, got shape {entries.shape}"
            )
        if entries.shape[0] < 1:
            raise DimensionMismatchError("covariance dimension must be at least 1")
        symmetric = 0.5 * (entries + entries.T)
        symmetric.setflags(write=False)
        return symmetric

    @model_validator(mode="after")
    def check_definiteness(self) -> "CovarianceMatrix":
        if self.definiteness == Definiteness.DEFINITE:
            try:
                np.linalg.cholesky(self.entries)
            except np.linalg.LinAlgError:
                raise SingularMatrixError()
        elif self.definiteness == Definiteness.SEMIDEFINITE:
            eigenvalues = np.linalg.eigvalsh(self.entries)
            tolerance = self.dim * EPS * float(np.max(np.abs(eigenvalues)))
            if eigenvalues[0] < -tolerance:
                raise SingularMatrixError(
                    f"smallest eigenvalue {eigenvalues[0]:.3e} below -{tolerance:.3e}"
                )
        return self

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def identity(cls, n: int) -> "CovarianceMatrix":
        return cls(entries=np.eye(n), definiteness=Definiteness.DEFINITE)

    @classmethod
    def diagonal(cls, values) -> "CovarianceMatrix":
        return cls(entries=np.diag(np.asarray(values, dtype=np.float64)))


class SpectralDecomposition(BaseModel):
    """Ascending eigenvalues and the matching orthonormal columns."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @model_validator(mode="after")
    def check_shapes(self) -> "SpectralDecomposition":
        n = self.eigenvalues.shape[0]
        if self.eigenvectors.shape != (n, n):
            raise DimensionMismatchError(
                f"eigenvectors shape {self.eigenvectors.shape} for {n} eigenvalues"
            )
        return self

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self, eigenvalues: np.ndarray | None = None):
        """V diag(eigenvalues) V^T, with the own eigenvalues by default."""
        values = self.eigenvalues if eigenvalues is None else eigenvalues
        return (self.eigenvectors * values) @ self.eigenvectors.T
