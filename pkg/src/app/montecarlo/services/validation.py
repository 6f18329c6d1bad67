"""
Comparison of Monte Carlo summaries with the closed forms, plus the purely
numeric consistency checks of the analytic layer.
"""

import math
from typing import Iterable, Sequence

import numpy as np

from src.app.analytics.services.closed_forms import (
    expected_frobenius_oracle,
    expected_kl_in_out,
    expected_kl_sample,
    expected_log_det_wishart,
    expected_tau_inv_wishart,
    kl_frobenius_link,
    oracle_kl_closed,
    oracle_kl_partial_sum,
    oracle_rq,
    p_from_qstar,
    region_boundary_qstar,
)
from src.app.analytics.services.finite_size import (
    finite_frobenius,
    finite_kl_in_out,
    finite_kl_sample,
    finite_log_det_wishart,
    finite_oracle_kl,
    finite_tau_inv_wishart,
)
from src.app.estimators.services.rie import shrinkage_r
from src.app.montecarlo.models.experiment import (
    ExperimentConfig,
    ExperimentRecord,
    Metric,
)
from src.app.montecarlo.models.validation import (
    CheckKind,
    ValidationCheck,
    ValidationReport,
)
from src.app.shared.domain.constants import CONVERGENCE_BOUND
from src.app.shared.domain.exceptions import DomainError
from src.app.shared.utils.dependencies import get_settings
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)

SERIES_ORDER = 60
SERIES_TOLERANCE = 1e-6
SERIES_STRICT_RQ = 3.0
SERIES_MAX_RQ = 3.9
BOUNDARY_TOLERANCE = 1e-10
ASYMPTOTE_TOLERANCE = 1e-3
LINK_TOLERANCE = 1e-12
SMALL_PARAMETER_P = 0.01
SMALL_PARAMETER_TOLERANCE = 0.015
EXACT_REL_TOL = 1e-3

# metrics whose finite-n expectation is exact
EXACT_METRICS = frozenset(
    {
        Metric.KL_SAMPLE,
        Metric.KL_IN_OUT,
        Metric.TAU_INV_WISHART,
        Metric.LOG_DET_WISHART,
    }
)


def analytic_prediction(config: ExperimentConfig, metric: Metric) -> float | None:
    """
    Large-n expectation of a metric for one cell, or None when no closed form
    applies (Oracle metrics outside the convergence region or at p = 0).
    """
    q = config.effective_q
    if metric == Metric.KL_SAMPLE:
        return expected_kl_sample(q)
    if metric == Metric.KL_IN_OUT:
        return expected_kl_in_out(q, q)
    if metric == Metric.TAU_INV_WISHART:
        return expected_tau_inv_wishart(q)
    if metric == Metric.LOG_DET_WISHART:
        return expected_log_det_wishart(q)
    if config.identity_population:
        return None
    if metric in (Metric.KL_ORACLE, Metric.KL_LINEAR):
        prediction = oracle_kl_closed(config.p, q)
        return prediction.closed_form if prediction.converges else None
    if metric == Metric.FROBENIUS_ORACLE:
        return expected_frobenius_oracle(config.p, q)
    return expected_frobenius_oracle(config.p, q, shrinkage_r(config.n, config.p, q))


def finite_size_expectation(config: ExperimentConfig, metric: Metric) -> float | None:
    """
    Expectation at the cell's own n and t, exact for EXACT_METRICS and built
    from the finite population moments for the Oracle and Frobenius metrics.
    None when only the large-n form is available.
    """
    n, t, q = config.n, config.t, config.effective_q
    try:
        if metric == Metric.KL_SAMPLE:
            return finite_kl_sample(n, t)
        if metric == Metric.KL_IN_OUT:
            return finite_kl_in_out(n, t, t)
        if metric == Metric.TAU_INV_WISHART:
            return finite_tau_inv_wishart(n, t)
        if metric == Metric.LOG_DET_WISHART:
            return finite_log_det_wishart(n, t)
        if config.identity_population or metric == Metric.KL_LINEAR:
            return None
        if metric == Metric.KL_ORACLE:
            return finite_oracle_kl(n, config.p, q)
        if metric == Metric.FROBENIUS_ORACLE:
            return finite_frobenius(n, config.p, q)
        return finite_frobenius(n, config.p, q, shrinkage_r(n, config.p, q))
    except DomainError as e:
        logger.debug("no finite-n expectation for %s: %s", metric.value, e.message)
        return None


def finite_size_allowance(metric: Metric, q: float, refined: bool = False) -> float:
    """
    Numerator of the O(1/n) bias allowed on top of the relative tolerance;
    nothing is left to allow for an exact finite-n expectation.
    """
    if refined:
        return 0.0 if metric in EXACT_METRICS else 2.0
    if metric in (Metric.KL_SAMPLE, Metric.KL_IN_OUT):
        return 2.0 + q / (1.0 - q) ** 2
    return 2.0


def tolerance(
    metric: Metric,
    reference: float,
    stderr: float,
    n: int,
    q: float,
    refined: bool = False,
) -> float:
    settings = get_settings()
    if refined and metric in EXACT_METRICS:
        relative = EXACT_REL_TOL
    else:
        relative = settings.VALIDATION_REL_TOL
    return max(
        settings.VALIDATION_Z_MAX * stderr,
        relative * abs(reference) + finite_size_allowance(metric, q, refined) / n,
    )


def _z_score(difference: float, stderr: float) -> float:
    if stderr > 0:
        return difference / stderr
    return 0.0 if difference == 0 else math.copysign(math.inf, difference)


def check_record(record: ExperimentRecord) -> list[ValidationCheck]:
    """
    One check per metric with a closed form. The check is centered on the
    finite-n expectation when there is one, the large-n value is reported next
    to it.
    """
    config = record.config
    checks = []
    for metric, summary in record.summaries.items():
        analytic = analytic_prediction(config, metric)
        if analytic is None:
            continue
        expected = finite_size_expectation(config, metric)
        refined = expected is not None
        reference = expected if refined else analytic
        difference = summary.mean - reference
        allowed = tolerance(
            metric, reference, summary.stderr, config.n, record.effective_q, refined
        )
        checks.append(
            ValidationCheck(
                check=CheckKind.MONTE_CARLO,
                n=config.n,
                q=record.effective_q,
                p=config.p,
                metric=metric.value,
                analytic=analytic,
                expected=expected,
                empirical=summary.mean,
                stderr=summary.stderr,
                z=_z_score(difference, summary.stderr),
                tolerance=allowed,
                passed=abs(difference) <= allowed,
            )
        )
    return checks


def check_population_independence(
    reference: ExperimentRecord, identity: ExperimentRecord, metric: Metric
) -> ValidationCheck:
    """Agreement of a metric between a random population and C = 1."""
    first = reference.summaries[metric]
    second = identity.summaries[metric]
    stderr = math.hypot(first.stderr, second.stderr)
    difference = second.mean - first.mean
    allowed = get_settings().VALIDATION_Z_MAX * stderr
    return ValidationCheck(
        check=CheckKind.POPULATION_INDEPENDENCE,
        n=reference.config.n,
        q=reference.effective_q,
        p=reference.config.p,
        metric=metric.value,
        analytic=first.mean,
        empirical=second.mean,
        stderr=stderr,
        z=_z_score(difference, stderr),
        tolerance=allowed,
        passed=abs(difference) <= allowed,
    )


def series_checks(
    qs: Sequence[float], qstars: Sequence[float]
) -> list[ValidationCheck]:
    """
    Order-60 partial sums against the closed form over the convergent part of
    the grid. Cells with rq <= 3 must agree within 1e-6; closer to the boundary
    the alternating-series remainder bound x^61 / (1 + x) applies instead.
    """
    checks = []
    for qstar in qstars:
        p = p_from_qstar(qstar)
        for q in qs:
            rq = oracle_rq(p, q)
            if rq >= SERIES_MAX_RQ:
                continue
            x = rq / 4.0
            closed = oracle_kl_closed(p, q).closed_form
            partial = oracle_kl_partial_sum(p, q, SERIES_ORDER)
            if rq <= SERIES_STRICT_RQ:
                allowed = SERIES_TOLERANCE
            else:
                allowed = x ** (SERIES_ORDER + 1) / (1.0 + x) + LINK_TOLERANCE
            checks.append(
                ValidationCheck(
                    check=CheckKind.SERIES_CONVERGENCE,
                    q=q,
                    p=p,
                    analytic=closed,
                    empirical=partial,
                    tolerance=allowed,
                    passed=abs(partial - closed) <= allowed,
                )
            )
    return checks


def region_checks(qs: Iterable[float]) -> list[ValidationCheck]:
    """
    Points of the rq = 4 curve must satisfy 5 q* q = 4 q* + 4 q, and its two
    asymptotes (q* -> 0.8 as q grows, q -> 4 as q* -> 1) are recovered.
    """
    checks = []
    for q in qs:
        if q <= CONVERGENCE_BOUND:
            continue
        qstar = region_boundary_qstar(q)
        if qstar >= 1.0:
            continue
        rq = oracle_rq(p_from_qstar(qstar), q)
        checks.append(
            ValidationCheck(
                check=CheckKind.REGION_BOUNDARY,
                q=q,
                p=p_from_qstar(qstar),
                metric="rq",
                analytic=CONVERGENCE_BOUND,
                empirical=rq,
                tolerance=BOUNDARY_TOLERANCE,
                passed=abs(rq - CONVERGENCE_BOUND) <= BOUNDARY_TOLERANCE,
            )
        )
    far_q = 1e4
    far_qstar = region_boundary_qstar(far_q)
    checks.append(
        ValidationCheck(
            check=CheckKind.REGION_BOUNDARY,
            q=far_q,
            p=p_from_qstar(far_qstar),
            metric="qstar_asymptote",
            analytic=0.8,
            empirical=far_qstar,
            tolerance=ASYMPTOTE_TOLERANCE,
            passed=abs(far_qstar - 0.8) <= ASYMPTOTE_TOLERANCE,
        )
    )
    near_qstar = 1.0 - 1e-6
    # the boundary curve is symmetric in (q, q*)
    near_q = 4.0 * near_qstar / (5.0 * near_qstar - 4.0)
    checks.append(
        ValidationCheck(
            check=CheckKind.REGION_BOUNDARY,
            q=near_q,
            p=p_from_qstar(near_qstar),
            metric="q_asymptote",
            analytic=CONVERGENCE_BOUND,
            empirical=near_q,
            tolerance=ASYMPTOTE_TOLERANCE,
            passed=abs(near_q - CONVERGENCE_BOUND) <= ASYMPTOTE_TOLERANCE,
        )
    )
    return checks


def link_checks(points: int = 10) -> list[ValidationCheck]:
    """
    First-order KL term against a quarter of the Frobenius error on a
    points x points (p, q) grid, then the small-p regime where the whole
    closed-form KL stays within 1.5% of that quarter.
    """
    checks = []
    grid = np.linspace(0.1, 5.0, points)
    for p in grid:
        for q in grid:
            link = kl_frobenius_link(float(p), float(q))
            difference = abs(link.first_order_kl - link.quarter_frobenius)
            checks.append(
                ValidationCheck(
                    check=CheckKind.FIRST_ORDER_LINK,
                    q=float(q),
                    p=float(p),
                    analytic=link.quarter_frobenius,
                    empirical=link.first_order_kl,
                    tolerance=LINK_TOLERANCE,
                    passed=difference <= LINK_TOLERANCE,
                )
            )
    for q in np.linspace(0.0, 1.0, points + 2)[1:-1]:
        closed = oracle_kl_closed(SMALL_PARAMETER_P, float(q)).closed_form
        quarter = kl_frobenius_link(SMALL_PARAMETER_P, float(q)).quarter_frobenius
        relative = abs(closed - quarter) / closed
        checks.append(
            ValidationCheck(
                check=CheckKind.SMALL_PARAMETER_LINK,
                q=float(q),
                p=SMALL_PARAMETER_P,
                analytic=closed,
                empirical=quarter,
                tolerance=SMALL_PARAMETER_TOLERANCE,
                passed=relative < SMALL_PARAMETER_TOLERANCE,
            )
        )
    return checks


def build_report(
    records: Sequence[ExperimentRecord],
    independence_pairs: Sequence[tuple[ExperimentRecord, ExperimentRecord]] = (),
    numeric_checks: Sequence[ValidationCheck] = (),
) -> ValidationReport:
    checks: list[ValidationCheck] = []
    for record in records:
        checks.extend(check_record(record))
    for reference, identity in independence_pairs:
        for metric in reference.config.metrics:
            if metric in identity.summaries:
                checks.append(
                    check_population_independence(reference, identity, metric)
                )
    checks.extend(numeric_checks)
    report = ValidationReport(checks=checks)
    logger.info(
        "validation checks=%s failures=%s", len(report.checks), len(report.failures)
    )
    return report
