import math
import time
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel
from threadpoolctl import threadpool_limits

from src.app.divergence.services.metrics import frobenius_error, kl_normalized
from src.app.estimators.services.rie import (
    linear_shrinkage,
    oracle_estimator,
    shrinkage_r,
)
from src.app.matcore.models.matrices import CovarianceMatrix
from src.app.matcore.services.linalg import inverse_spd, log_det, normalized_trace
from src.app.montecarlo.models.experiment import (
    SAMPLE_METRICS,
    CellFailure,
    ExperimentConfig,
    ExperimentRecord,
    GridOutcome,
    Metric,
    MetricSummary,
)
from src.app.sampling.models.specs import PopulationSpec, RngStream
from src.app.sampling.services.samplers import (
    sample_covariance,
    sample_gaussian_data,
    sample_inverse_wishart,
    sample_white_wishart,
)
from src.app.shared.domain.constants import (
    SUBSTREAM_AUXILIARY,
    SUBSTREAM_DATA,
    SUBSTREAM_OUT_OF_SAMPLE,
    SUBSTREAM_POPULATION,
)
from src.app.shared.domain.exceptions import (
    EmptyGridError,
    ReplicateFailedError,
    RmtKlError,
)
from src.app.shared.utils.dependencies import get_settings
from src.app.utils.decorators import log_time_and_error_sync
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)


class ReplicateOutcome(BaseModel):
    replicate: int
    values: dict[Metric, float] = {}
    elapsed_s: float = 0.0
    error: str | None = None
    error_code: str | None = None


def derive_cell_seed(master_seed: int, cell: int) -> int:
    """First 64-bit word of SeedSequence(master_seed, spawn_key=(cell,))."""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(cell,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def sample_population(config: ExperimentConfig, stream: RngStream) -> CovarianceMatrix:
    if config.identity_population:
        return CovarianceMatrix.identity(config.n)
    return sample_inverse_wishart(
        PopulationSpec(n=config.n, p=config.p), stream.child(SUBSTREAM_POPULATION)
    )


def replicate_metrics(config: ExperimentConfig, replicate: int) -> dict[Metric, float]:
    """One pass of the C -> X -> E -> Xi pipeline for a single replicate."""
    stream = RngStream(master_seed=config.seed, stream_id=replicate)
    population = sample_population(config, stream)
    values: dict[Metric, float] = {}

    if SAMPLE_METRICS.intersection(config.metrics):
        data = sample_gaussian_data(population, config.t, stream.child(SUBSTREAM_DATA))
        sample = sample_covariance(data)

        if Metric.KL_SAMPLE in config.metrics:
            values[Metric.KL_SAMPLE] = kl_normalized(population, sample)
        if Metric.KL_IN_OUT in config.metrics:
            # independent data of the same size from the same population
            out_of_sample = sample_covariance(
                sample_gaussian_data(
                    population, config.t, stream.child(SUBSTREAM_OUT_OF_SAMPLE)
                )
            )
            values[Metric.KL_IN_OUT] = kl_normalized(out_of_sample, sample)
        if {Metric.KL_ORACLE, Metric.FROBENIUS_ORACLE}.intersection(config.metrics):
            oracle = oracle_estimator(sample, population).matrix
            if Metric.KL_ORACLE in config.metrics:
                values[Metric.KL_ORACLE] = kl_normalized(population, oracle)
            if Metric.FROBENIUS_ORACLE in config.metrics:
                values[Metric.FROBENIUS_ORACLE] = frobenius_error(population, oracle)
        if {Metric.KL_LINEAR, Metric.FROBENIUS_LINEAR}.intersection(config.metrics):
            shrunk = linear_shrinkage(
                sample, shrinkage_r(config.n, config.p, config.effective_q)
            )
            if Metric.KL_LINEAR in config.metrics:
                values[Metric.KL_LINEAR] = kl_normalized(population, shrunk)
            if Metric.FROBENIUS_LINEAR in config.metrics:
                values[Metric.FROBENIUS_LINEAR] = frobenius_error(population, shrunk)

    if {Metric.TAU_INV_WISHART, Metric.LOG_DET_WISHART}.intersection(config.metrics):
        wishart = sample_white_wishart(
            config.n, config.q, stream.child(SUBSTREAM_AUXILIARY)
        )
        if Metric.TAU_INV_WISHART in config.metrics:
            values[Metric.TAU_INV_WISHART] = normalized_trace(inverse_spd(wishart))
        if Metric.LOG_DET_WISHART in config.metrics:
            values[Metric.LOG_DET_WISHART] = log_det(wishart) / config.n

    return {metric: values[metric] for metric in config.metrics}


def _run_replicate(config: ExperimentConfig, replicate: int) -> ReplicateOutcome:
    # single-threaded BLAS keeps every replicate bit-identical across worker counts
    with threadpool_limits(limits=1, user_api="blas"):
        start = time.perf_counter()
        try:
            values = replicate_metrics(config, replicate)
        except RmtKlError as e:
            return ReplicateOutcome(
                replicate=replicate, error=e.message, error_code=e.msg_code
            )
        return ReplicateOutcome(
            replicate=replicate,
            values=values,
            elapsed_s=time.perf_counter() - start,
        )


def summarize(values: Sequence[float]) -> MetricSummary:
    """Mean and standard error with compensated summation in the given order."""
    count = len(values)
    mean = math.fsum(values) / count
    if count == 1:
        return MetricSummary(mean=mean, stderr=0.0, count=1)
    variance = math.fsum((v - mean) ** 2 for v in values) / (count - 1)
    return MetricSummary(mean=mean, stderr=math.sqrt(variance / count), count=count)


def aggregate(
    config: ExperimentConfig,
    outcomes: Sequence[ReplicateOutcome],
    record_walltime: bool,
) -> ExperimentRecord:
    ordered = sorted(outcomes, key=lambda outcome: outcome.replicate)
    for outcome in ordered:
        if outcome.error is not None:
            raise ReplicateFailedError(outcome.replicate, outcome.error)
    summaries = {
        metric: summarize([outcome.values[metric] for outcome in ordered])
        for metric in config.metrics
    }
    walltime = math.fsum(o.elapsed_s for o in ordered) if record_walltime else 0.0
    return ExperimentRecord(
        config=config,
        effective_q=config.effective_q,
        summaries=summaries,
        walltime_s=walltime,
    )


def _parallel(workers: int | None):
    settings = get_settings()
    return Parallel(n_jobs=workers or settings.resolved_workers())


@log_time_and_error_sync
def run_cell(
    config: ExperimentConfig,
    workers: int | None = None,
    record_walltime: bool | None = None,
) -> ExperimentRecord:
    """
    Runs every replicate of one cell and aggregates its metrics in replicate
    order. The first failing replicate aborts the cell.
    """
    if record_walltime is None:
        record_walltime = get_settings().RECORD_WALLTIME
    logger.info(
        "run_cell n=%s q=%s p=%s replicates=%s metrics=%s",
        config.n,
        config.q,
        config.p,
        config.replicates,
        ",".join(config.metrics),
    )
    outcomes = _parallel(workers)(
        delayed(_run_replicate)(config, replicate)
        for replicate in range(config.replicates)
    )
    return aggregate(config, outcomes, record_walltime)


@log_time_and_error_sync
def run_grid(
    grid: Sequence[ExperimentConfig],
    workers: int | None = None,
    record_walltime: bool | None = None,
) -> GridOutcome:
    """
    Runs the cells of a grid, each with a seed derived from (config.seed, cell
    index). Replicates of all cells share one worker pool; failed cells are
    reported in the outcome while the other cells complete.
    """
    if not grid:
        raise EmptyGridError()
    if record_walltime is None:
        record_walltime = get_settings().RECORD_WALLTIME

    cells = [
        config.model_copy(update={"seed": derive_cell_seed(config.seed, index)})
        for index, config in enumerate(grid)
    ]
    tasks = [
        (index, replicate)
        for index, config in enumerate(cells)
        for replicate in range(config.replicates)
    ]
    logger.info("run_grid cells=%s replicates_total=%s", len(cells), len(tasks))
    outcomes = _parallel(workers)(
        delayed(_run_replicate)(cells[index], replicate) for index, replicate in tasks
    )

    by_cell: list[list[ReplicateOutcome]] = [[] for _ in cells]
    for (index, _), outcome in zip(tasks, outcomes):
        by_cell[index].append(outcome)

    records: list[ExperimentRecord] = []
    failures: list[CellFailure] = []
    for index, config in enumerate(cells):
        try:
            records.append(aggregate(config, by_cell[index], record_walltime))
        except ReplicateFailedError as e:
            failures.append(
                CellFailure(
                    cell=index,
                    replicate=e.replicate,
                    message=e.message,
                    msg_code=e.msg_code,
                )
            )
    if failures:
        logger.warning("run_grid failed_cells=%s", [f.cell for f in failures])
    return GridOutcome(records=records, failures=failures)
