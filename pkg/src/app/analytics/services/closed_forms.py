"""
Large-n expectations for sample covariances, the Oracle of a white inverse
Wishart population and the link between its KL and Frobenius errors.

Every removable singularity at q -> 0 switches to a three-term Taylor branch
below SERIES_THRESHOLD.
"""

import numpy as np

from src.app.analytics.models.predictions import KlFrobeniusLink, OracleKlPrediction
from src.app.estimators.models.estimates import ShrinkageCoefficient
from src.app.shared.domain.constants import CONVERGENCE_BOUND, SERIES_THRESHOLD
from src.app.shared.domain.exceptions import DomainError


def qstar_from_p(p: float) -> float:
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    return p / (1.0 + p)


def p_from_qstar(qstar: float) -> float:
    if not 0.0 < qstar < 1.0:
        raise DomainError(f"q* must lie in (0, 1), got {qstar}")
    return qstar / (1.0 - qstar)


def _check_aspect_ratio(q: float, name: str = "q", allow_zero: bool = False) -> None:
    lower_ok = q >= 0.0 if allow_zero else q > 0.0
    if not lower_ok or q >= 1.0:
        raise DomainError(
            f"{name}={q} outside of {'[0, 1)' if allow_zero else '(0, 1)'}: "
            "the sample covariance is singular for q >= 1"
        )


def _half_log_term(q: float) -> float:
    """(1 - q) / (2q) * log(1 / (1 - q)), equal to 1/2 at q = 0."""
    if q < SERIES_THRESHOLD:
        return 0.5 - q / 4.0 - q**2 / 12.0 - q**3 / 24.0
    return (1.0 - q) / (2.0 * q) * -np.log1p(-q)


def expected_kl_sample(q: float) -> float:
    """E[KL(C || E)] / n = (1-q)/(2q) log(1/(1-q)) + 1/(2(1-q)) - 1"""
    _check_aspect_ratio(q)
    if q < SERIES_THRESHOLD:
        return q / 4.0 + 5.0 * q**2 / 12.0 + 11.0 * q**3 / 24.0
    return float(_half_log_term(q) + 1.0 / (2.0 * (1.0 - q)) - 1.0)


def expected_tau_inv_wishart(q: float) -> float:
    """E[tau(W_q^-1)] = 1 / (1 - q)"""
    _check_aspect_ratio(q)
    return 1.0 / (1.0 - q)


def expected_log_det_wishart(q: float) -> float:
    """E[(1/n) log det W_q] = (1-q)/q log(1/(1-q)) - 1"""
    _check_aspect_ratio(q)
    if q < SERIES_THRESHOLD:
        return -q / 2.0 - q**2 / 6.0 - q**3 / 12.0
    return float(2.0 * _half_log_term(q) - 1.0)


def expected_kl_in_out(q_in: float, q_out: float) -> float:
    """
    E[KL(E_out || E_in)] / n for two independent sample covariances of the same
    population. Tends to expected_kl_sample(q_in) as q_out -> 0 and does not
    vanish at q_in = q_out.
    """
    _check_aspect_ratio(q_in, name="q_in")
    _check_aspect_ratio(q_out, name="q_out", allow_zero=True)
    return float(
        _half_log_term(q_in)
        - _half_log_term(q_out)
        + 1.0 / (2.0 * (1.0 - q_in))
        - 0.5
    )


def oracle_rq(p: float, q: float) -> float:
    """lim r q = q* q / (q* + q - q* q)"""
    if q < 0:
        raise DomainError(f"q must be non-negative, got {q}")
    qstar = qstar_from_p(p)
    if q == 0.0:
        return 0.0
    return qstar * q / (qstar + q - qstar * q)


def oracle_kl_partial_sum(p: float, q: float, order: int) -> float:
    """sum_{j=1..k} (-1)^(j-1) (rq/4)^j"""
    if order < 1:
        raise DomainError(f"series order must be at least 1, got {order}")
    x = oracle_rq(p, q) / 4.0
    signs = np.where(np.arange(order) % 2 == 0, 1.0, -1.0)
    powers = x ** np.arange(1, order + 1)
    return float(np.sum(signs * powers))


def oracle_kl_second_order(p: float, q: float) -> float:
    """rq/4 - (rq/4)^2, the two leading terms of the series"""
    return oracle_kl_partial_sum(p, q, 2)


def oracle_kl_closed(p: float, q: float) -> OracleKlPrediction:
    rq = oracle_rq(p, q)
    return OracleKlPrediction(
        p=p,
        qstar=qstar_from_p(p),
        q=q,
        rq=rq,
        closed_form=p * q / (4.0 * p + 4.0 * q + p * q),
        converges=rq < CONVERGENCE_BOUND,
    )


def expected_frobenius_oracle(
    p: float, q: float, r: ShrinkageCoefficient | None = None
) -> float:
    """
    (1 - r)^2 p + q r^2 for a given shrinkage r; with the asymptotic
    r = p / (p + q) (the default) this is pq / (p + q).
    """
    if p <= 0 or q < 0:
        raise DomainError(f"Frobenius error needs p > 0 and q >= 0 (p={p}, q={q})")
    shrinkage = p / (p + q) if r is None else r.r
    return (1.0 - shrinkage) ** 2 * p + q * shrinkage**2


def kl_frobenius_link(p: float, q: float) -> KlFrobeniusLink:
    """First-order KL term rq/4 next to a quarter of the asymptotic Frobenius error."""
    if q == 0.0:
        return KlFrobeniusLink(first_order_kl=0.0, quarter_frobenius=0.0)
    return KlFrobeniusLink(
        first_order_kl=oracle_kl_partial_sum(p, q, 1),
        quarter_frobenius=expected_frobenius_oracle(p, q) / 4.0,
    )


def region_boundary_qstar(q: float) -> float:
    """q* solving rq = 4, i.e. 5 q* q = 4 q* + 4 q; only exists for q > 4."""
    if q <= CONVERGENCE_BOUND:
        raise DomainError(f"the series converges for every q* when q={q} <= 4")
    return 4.0 * q / (5.0 * q - 4.0)
