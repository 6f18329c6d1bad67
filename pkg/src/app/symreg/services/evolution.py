import numpy as np
from joblib import Parallel, delayed

from src.app.montecarlo.models.experiment import RegressionDataset
from src.app.montecarlo.services.harness import derive_cell_seed
from src.app.shared.domain.exceptions import EmptyDatasetError
from src.app.shared.utils.dependencies import get_settings
from src.app.symreg.models.expression import (
    Expression,
    GpConfig,
    GpResult,
    ScoredExpression,
)
from src.app.symreg.services.operators import (
    best_of,
    crossover,
    fitness,
    mutate,
    ramped_half_and_half,
    regression_inputs,
    target_variance,
    tournament_select,
)
from src.app.utils.decorators import log_time_and_error_sync
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)


def _score_chunk(
    chunk: list[Expression],
    dataset: RegressionDataset,
    parsimony: float,
    generation: int,
) -> list[ScoredExpression]:
    inputs = regression_inputs(dataset)
    return [
        ScoredExpression(
            expression=expr,
            report=fitness(expr, dataset, parsimony, generation, inputs),
        )
        for expr in chunk
    ]


def score_population(
    population: list[Expression],
    dataset: RegressionDataset,
    parsimony: float,
    generation: int,
    workers: int,
) -> list[ScoredExpression]:
    if workers <= 1:
        return _score_chunk(population, dataset, parsimony, generation)
    size = -(-len(population) // workers)
    chunks = [population[i : i + size] for i in range(0, len(population), size)]
    scored = Parallel(n_jobs=workers)(
        delayed(_score_chunk)(chunk, dataset, parsimony, generation)
        for chunk in chunks
    )
    return [member for chunk in scored for member in chunk]


def next_generation(
    scored: list[ScoredExpression], config: GpConfig, rng: np.random.Generator
) -> list[Expression]:
    offspring = [best_of(scored).expression]
    while len(offspring) < config.population_size:
        first = tournament_select(scored, config.tournament_size, rng).expression
        second = tournament_select(scored, config.tournament_size, rng).expression
        if rng.random() < config.crossover_prob:
            first, second = crossover(first, second, rng, config.max_depth)
        offspring.append(mutate(first, rng, config.mutation_prob, config.max_depth))
        if len(offspring) < config.population_size:
            offspring.append(
                mutate(second, rng, config.mutation_prob, config.max_depth)
            )
    return offspring


def effective_parsimony(config: GpConfig, dataset: RegressionDataset) -> float:
    """
    Per-node penalty used for scoring. A relative parsimony is scaled by the
    variance of the training target so that it weighs the same against the
    error whatever the magnitude of the target.
    """
    if not config.relative_parsimony:
        return config.parsimony
    return config.parsimony * target_variance(dataset)


@log_time_and_error_sync
def evolve(
    config: GpConfig, dataset: RegressionDataset, workers: int | None = None
) -> GpResult:
    """
    Runs one GP round: ramped half-and-half initialisation, then per generation
    the single best individual is carried over before tournament selection,
    crossover and mutation fill the rest of the population. All random draws
    happen in this process, in order, so the outcome only depends on the seed.
    """
    if not len(dataset):
        raise EmptyDatasetError()
    workers = workers or get_settings().resolved_workers()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    parsimony = effective_parsimony(config, dataset)

    population = ramped_half_and_half(
        rng, config.population_size, config.init_depth_min, config.init_depth_max
    )
    scored = score_population(population, dataset, parsimony, 0, workers)
    history = [best_of(scored).report]

    for generation in range(1, config.generations + 1):
        population = next_generation(scored, config, rng)
        scored = score_population(population, dataset, parsimony, generation, workers)
        best = best_of(scored)
        history.append(best.report)
        logger.debug(
            "generation=%s best_raw_mse=%s best_size=%s",
            generation,
            best.report.raw_mse,
            best.report.size,
        )

    best = best_of(scored)
    logger.info(
        "evolve seed=%s parsimony=%s best_raw_mse=%s best_size=%s",
        config.seed,
        parsimony,
        best.report.raw_mse,
        best.report.size,
    )
    return GpResult(
        seed=config.seed,
        best=best.expression,
        best_report=best.report,
        history=history,
        parsimony=parsimony,
    )


def evolve_rounds(
    config: GpConfig, dataset: RegressionDataset, workers: int | None = None
) -> list[GpResult]:
    """Independent rounds, each seeded from (config.seed, round index)."""
    return [
        evolve(
            config.model_copy(
                update={"seed": derive_cell_seed(config.seed, round_index)}
            ),
            dataset,
            workers=workers,
        )
        for round_index in range(config.independent_runs)
    ]
