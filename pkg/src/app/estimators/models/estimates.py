from enum import StrEnum, auto

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.app.matcore.models.matrices import CovarianceMatrix


class ShrinkageRegime(StrEnum):
    FINITE = auto()
    ASYMPTOTIC = auto()


class ShrinkageCoefficient(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0, le=1)
    regime: ShrinkageRegime


class OracleEstimate(BaseModel):
    """
    Oracle eigenvalues diag(V^T C V), kept in the ascending order of the
    sample eigenvalues so that both lists pair index by index.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    basis: np.ndarray
    sample_eigenvalues: np.ndarray
    oracle_eigenvalues: np.ndarray
    matrix: CovarianceMatrix
