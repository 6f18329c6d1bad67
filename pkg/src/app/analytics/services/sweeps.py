from typing import Sequence

import numpy as np

from src.app.analytics.models.predictions import RegionCell, SeriesPoint
from src.app.analytics.services.closed_forms import (
    oracle_kl_closed,
    oracle_kl_partial_sum,
    p_from_qstar,
)
from src.app.shared.domain.constants import CONVERGENCE_BOUND, REGION_BOUNDARY_TOL
from src.app.shared.domain.exceptions import ConfigRejectedError, EmptyGridError


def open_grid(low: float, high: float, points: int) -> list[float]:
    """`points` evenly spaced values strictly inside (low, high)."""
    return [float(v) for v in np.linspace(low, high, points + 2)[1:-1]]


def series_sweep(
    qs: Sequence[float], qstars: Sequence[float], orders: Sequence[int]
) -> list[SeriesPoint]:
    """Rows ordered by q*, then q, then series order."""
    if not orders:
        raise ConfigRejectedError("at least one series order is needed")
    if any(order < 1 for order in orders):
        raise ConfigRejectedError(f"series orders must be positive, got {orders}")
    if not qs or not qstars:
        raise EmptyGridError()
    points = []
    for qstar in qstars:
        p = p_from_qstar(qstar)
        for q in qs:
            closed = oracle_kl_closed(p, q).closed_form
            for order in orders:
                points.append(
                    SeriesPoint(
                        q=q,
                        qstar=qstar,
                        order=order,
                        partial_sum=oracle_kl_partial_sum(p, q, order),
                        closed_form=closed,
                    )
                )
    return points


def region_map(qs: Sequence[float], qstars: Sequence[float]) -> list[RegionCell]:
    """Convergence flag of the KL series over a (q*, q) grid."""
    if not qs or not qstars:
        raise EmptyGridError()
    cells = []
    for qstar in qstars:
        p = p_from_qstar(qstar)
        for q in qs:
            prediction = oracle_kl_closed(p, q)
            cells.append(
                RegionCell(
                    q=q,
                    qstar=qstar,
                    rq=prediction.rq,
                    converges=prediction.converges,
                    boundary=abs(prediction.rq - CONVERGENCE_BOUND)
                    < REGION_BOUNDARY_TOL,
                )
            )
    return cells
