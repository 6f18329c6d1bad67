import numpy as np

from src.app.matcore.models.matrices import CovarianceMatrix, Definiteness
from src.app.matcore.services.linalg import solve_spd, spectral_decompose
from src.app.sampling.models.specs import PopulationSpec, RngStream, SampleSpec
from src.app.shared.domain.exceptions import (
    DimensionMismatchError,
    InvalidSpecError,
    SingularMatrixError,
)
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)


def sample_white_wishart(n: int, q: float, rng: RngStream) -> CovarianceMatrix:
    """
    W = M M^T / t with M an n x t matrix of iid standard normals, t = floor(n/q).
    """
    spec = SampleSpec(n=n, q=q)
    draws = rng.generator().standard_normal((n, spec.t))
    return CovarianceMatrix(entries=draws @ draws.T / spec.t)


def sample_inverse_wishart(spec: PopulationSpec, rng: RngStream) -> CovarianceMatrix:
    """
    (1 - q*) W^-1 with W a white Wishart(n, q*). A numerically singular W is
    resampled once from the next substream before giving up.
    """
    stream = rng
    for attempt in range(2):
        wishart = sample_white_wishart(spec.n, spec.qstar, stream)
        try:
            inverse = solve_spd(wishart, np.eye(spec.n))
        except SingularMatrixError:
            logger.warning(
                "singular_wishart n=%s p=%s stream=%s substream=%s attempt=%s",
                spec.n,
                spec.p,
                stream.stream_id,
                stream.substream,
                attempt,
            )
            stream = stream.next_substream()
            continue
        return CovarianceMatrix(
            entries=(1.0 - spec.qstar) * inverse,
            definiteness=Definiteness.DEFINITE,
        )
    raise SingularMatrixError(
        f"generating Wishart singular twice for n={spec.n}, p={spec.p}"
    )


def symmetric_root(covariance: CovarianceMatrix) -> np.ndarray:
    """C^(1/2) = V diag(sqrt(lambda)) V^T; C must be positive definite."""
    decomposition = spectral_decompose(covariance)
    if decomposition.eigenvalues[0] <= 0.0:
        raise SingularMatrixError()
    return decomposition.reconstruct(np.sqrt(decomposition.eigenvalues))


def sample_gaussian_data(
    covariance: CovarianceMatrix, t: int, rng: RngStream
) -> np.ndarray:
    """n x t matrix whose columns are iid N(0, C), generated as C^(1/2) Z."""
    if t < 1:
        raise InvalidSpecError(f"t={t} observations requested")
    draws = rng.generator().standard_normal((covariance.dim, t))
    return symmetric_root(covariance) @ draws


def sample_covariance(data: np.ndarray) -> CovarianceMatrix:
    """
    E = X X^T / t after centering every feature (row of X) over the t
    observations.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatchError(f"data must be n x t, got shape {data.shape}")
    t = data.shape[1]
    if t < 2:
        raise InvalidSpecError(f"t={t} observations, centering needs at least 2")
    centered = data - data.mean(axis=1, keepdims=True)
    return CovarianceMatrix(entries=centered @ centered.T / t)
