"""
Expectations at the cell's own dimension n and observation count t.

The Wishart-based metrics have exact forms through the moments of the inverse
Wishart and the digamma function. The Oracle metrics keep their large-n shape
but are evaluated with the first two spectral moments of the finite population.
"""

import numpy as np
from scipy.special import digamma

from src.app.analytics.models.predictions import PopulationMoments
from src.app.analytics.services.closed_forms import (
    expected_frobenius_oracle,
    oracle_kl_closed,
    qstar_from_p,
)
from src.app.estimators.models.estimates import ShrinkageCoefficient
from src.app.sampling.models.specs import observation_count
from src.app.shared.domain.exceptions import DomainError


def _expected_log_det(n: int, dof: int) -> float:
    """E[log det(Z Z^T)] for Z an n x dof matrix of iid standard normals."""
    if dof < n:
        raise DomainError(f"log det of a rank-deficient Wishart (n={n}, dof={dof})")
    return float(np.sum(digamma((dof - np.arange(n)) / 2.0)) + n * np.log(2.0))


def _check_inverse_moment(n: int, dof: int, margin: int) -> None:
    if dof - n <= margin:
        raise DomainError(
            f"inverse Wishart moment undefined for n={n} with {dof} degrees of freedom"
        )


def finite_tau_inv_wishart(n: int, t: int) -> float:
    """E[tau(W^-1)] = t / (t - n - 1) for W = M M^T / t, M an n x t Gaussian."""
    _check_inverse_moment(n, t, 1)
    return t / (t - n - 1.0)


def finite_log_det_wishart(n: int, t: int) -> float:
    """E[(1/n) log det W] for W = M M^T / t."""
    return _expected_log_det(n, t) / n - float(np.log(t))


def _centered_log_det(n: int, t: int) -> float:
    # centering t observations leaves t - 1 degrees of freedom
    return _expected_log_det(n, t - 1) / n - float(np.log(t))


def finite_kl_sample(n: int, t: int) -> float:
    """E[KL(C || E)] / n for the centered sample covariance of t observations."""
    _check_inverse_moment(n, t - 1, 1)
    return 0.5 * (t / (t - n - 2.0) + _centered_log_det(n, t) - 1.0)


def finite_kl_in_out(n: int, t_in: int, t_out: int) -> float:
    """
    E[KL(E_out || E_in)] / n for two independent centered sample covariances of
    the same population, built from t_in and t_out observations.
    """
    _check_inverse_moment(n, t_in - 1, 1)
    trace_term = t_in * (t_out - 1.0) / (t_out * (t_in - n - 2.0))
    log_term = _centered_log_det(n, t_in) - _centered_log_det(n, t_out)
    return 0.5 * (trace_term + log_term - 1.0)


def inverse_wishart_moments(n: int, p: float) -> PopulationMoments:
    """tau moments of (1 - q*) W^-1 with W a white Wishart of t* = floor(n/q*)."""
    qstar = qstar_from_p(p)
    t_star = observation_count(n, qstar)
    _check_inverse_moment(n, t_star, 3)
    scale = (1.0 - qstar) * t_star
    first = scale / (t_star - n - 1.0)
    second = (
        scale**2
        * (t_star - 1.0)
        / ((t_star - n) * (t_star - n - 1.0) * (t_star - n - 3.0))
    )
    return PopulationMoments(first=first, second=second)


def finite_oracle_kl(n: int, p: float, q: float) -> float | None:
    """Closed-form Oracle KL at the population's finite-n spread, None if divergent."""
    prediction = oracle_kl_closed(inverse_wishart_moments(n, p).spread, q)
    return prediction.closed_form if prediction.converges else None


def finite_frobenius(
    n: int, p: float, q: float, r: ShrinkageCoefficient | None = None
) -> float:
    """
    Frobenius error of the Oracle (r = None) or of the linear shrinkage r E +
    (1 - r) 1 for a population with tau(C) = m1 and spread p'. The error
    scales as m1^2; shrinking towards 1 instead of m1 adds (1 - r)^2 (1 - m1)^2.
    """
    moments = inverse_wishart_moments(n, p)
    scaled = moments.first**2 * expected_frobenius_oracle(moments.spread, q, r)
    if r is None:
        return scaled
    return scaled + (1.0 - r.r) ** 2 * (1.0 - moments.first) ** 2
