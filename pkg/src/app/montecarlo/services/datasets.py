from enum import StrEnum
from typing import Iterable, Sequence

import numpy as np

from src.app.estimators.models.estimates import ShrinkageRegime
from src.app.estimators.services.rie import shrinkage_r
from src.app.montecarlo.models.experiment import (
    ExperimentConfig,
    ExperimentRecord,
    Metric,
    RegressionDataset,
    RegressionRow,
)
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)


class SyntheticTarget(StrEnum):
    SERIES2 = "series2"
    CLOSED = "closed"
    QR = "qr"


def build_regression_dataset(records: Iterable[ExperimentRecord]) -> RegressionDataset:
    """
    One row per record carrying a kl_oracle mean, with r at finite n and in the
    large-n limit. Records without kl_oracle, or with the identity population
    (no shrinkage coefficient), are skipped and counted.
    """
    rows: list[RegressionRow] = []
    skipped = 0
    for record in records:
        config = record.config
        summary = record.summaries.get(Metric.KL_ORACLE)
        if summary is None or config.identity_population:
            skipped += 1
            continue
        q = record.effective_q
        rows.append(
            RegressionRow(
                q=q,
                qstar=config.qstar,
                r_finite=shrinkage_r(config.n, config.p, q).r,
                r_asymptotic=shrinkage_r(
                    config.n, config.p, q, ShrinkageRegime.ASYMPTOTIC
                ).r,
                target_kl_norm=summary.mean,
                stderr=summary.stderr,
            )
        )
    if skipped:
        logger.warning("build_regression_dataset skipped_records=%s", skipped)
    logger.info("build_regression_dataset rows=%s", len(rows))
    return RegressionDataset(rows=rows)


def synthetic_target(kind: SyntheticTarget, q: float, r: float) -> float:
    x = 0.25 * (q * r)
    if kind == SyntheticTarget.SERIES2:
        return x - x * x
    if kind == SyntheticTarget.CLOSED:
        return x / (1.0 + x)
    return q * r


def synthetic_regression_dataset(
    rows: int,
    n: int,
    seed: int,
    target: SyntheticTarget = SyntheticTarget.SERIES2,
    q_range: tuple[float, float] = (0.05, 1.0),
    qstar_range: tuple[float, float] = (0.05, 0.95),
) -> RegressionDataset:
    """Noiseless rows drawn uniformly over (q, q*) with r at finite n."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    qs = rng.uniform(*q_range, size=rows)
    qstars = rng.uniform(*qstar_range, size=rows)
    dataset_rows = []
    for q, qstar in zip(qs, qstars):
        p = qstar / (1.0 - qstar)
        r_finite = shrinkage_r(n, p, q).r
        dataset_rows.append(
            RegressionRow(
                q=float(q),
                qstar=float(qstar),
                r_finite=r_finite,
                r_asymptotic=shrinkage_r(n, p, q, ShrinkageRegime.ASYMPTOTIC).r,
                target_kl_norm=synthetic_target(target, float(q), r_finite),
                stderr=0.0,
            )
        )
    return RegressionDataset(rows=dataset_rows)


def random_grid(
    cells: int,
    n: int,
    replicates: int,
    seed: int,
    q_range: tuple[float, float] = (0.05, 1.0),
    qstar_range: tuple[float, float] = (0.05, 0.95),
    metrics: Sequence[Metric] = (Metric.KL_ORACLE,),
) -> list[ExperimentConfig]:
    """Cells with (q, q*) drawn uniformly on the given ranges."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    qs = rng.uniform(*q_range, size=cells)
    qstars = rng.uniform(*qstar_range, size=cells)
    return [
        ExperimentConfig.from_qstar(
            float(qstar),
            n=n,
            q=float(q),
            replicates=replicates,
            seed=seed,
            metrics=tuple(metrics),
        )
        for q, qstar in zip(qs, qstars)
    ]


def parameter_grid(
    qs: Sequence[float],
    qstars: Sequence[float],
    n: int,
    replicates: int,
    seed: int,
    metrics: Sequence[Metric] = (Metric.KL_ORACLE,),
) -> list[ExperimentConfig]:
    """Cartesian grid, q* in the outer loop."""
    return [
        ExperimentConfig.from_qstar(
            qstar,
            n=n,
            q=q,
            replicates=replicates,
            seed=seed,
            metrics=tuple(metrics),
        )
        for qstar in qstars
        for q in qs
    ]


def split_dataset(
    dataset: RegressionDataset, holdout_fraction: float, seed: int
) -> tuple[RegressionDataset, RegressionDataset]:
    """
    Deterministic (training, held-out) split. Datasets too small to spare a
    row are used whole for both.
    """
    holdout = int(round(len(dataset) * holdout_fraction))
    if holdout < 1 or holdout >= len(dataset):
        return dataset, dataset
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    order = rng.permutation(len(dataset))
    held_out = sorted(int(i) for i in order[:holdout])
    training = sorted(int(i) for i in order[holdout:])
    return (
        RegressionDataset(rows=[dataset.rows[i] for i in training]),
        RegressionDataset(rows=[dataset.rows[i] for i in held_out]),
    )
