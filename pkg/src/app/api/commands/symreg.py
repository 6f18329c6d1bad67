import argparse

from src.app.api.commands.command_utils import (
    add_common_arguments,
    output_paths,
    print_table,
    resolve_workers,
    write_manifest,
)
from src.app.montecarlo.services.datasets import (
    SyntheticTarget,
    split_dataset,
    synthetic_regression_dataset,
)
from src.app.montecarlo.services.persistence import load_dataset
from src.app.shared.domain.exceptions import (
    EmptyDatasetError,
    ValidationFailedError,
)
from src.app.shared.utils.dependencies import get_settings
from src.app.symreg.helpers.expression_helpers import (
    save_best_expressions,
    save_history,
    second_order_expression,
    to_infix,
)
from src.app.symreg.models.expression import GpConfig
from src.app.symreg.services.evolution import evolve_rounds
from src.app.symreg.services.operators import held_out_mse
from src.app.symreg.services.simplify import simplify
from src.app.utils.decorators import log_time_and_error_sync

NAME = "symreg"
HELP = "genetic-programming symbolic regression of the normalized KL"
HOLDOUT_FRACTION = 0.2
SYNTHETIC_DIMENSION = 1000
REFERENCE_FACTOR = 2.0


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    add_common_arguments(parser)
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--dataset", default=None, help="regression dataset CSV")
    source.add_argument(
        "--synthetic",
        choices=[target.value for target in SyntheticTarget],
        default=None,
        help="noiseless target, series2 when no dataset is given",
    )
    parser.add_argument("--rows", type=int, default=500, help="synthetic rows")
    parser.add_argument("--population", type=int, default=None, help="GP population")
    parser.add_argument("--generations", type=int, default=None)
    parser.add_argument("--parsimony", type=float, default=None)
    parser.add_argument("--rounds", type=int, default=None, help="independent rounds")
    parser.set_defaults(handler=run)


def check_against_reference(held_out_errors: list[float], reference: float) -> None:
    """The best round must stay within REFERENCE_FACTOR x the second-order error."""
    best = min(held_out_errors)
    if best > REFERENCE_FACTOR * reference:
        raise ValidationFailedError(
            f"best held-out mse {best:.6g} above {REFERENCE_FACTOR:g} x the "
            f"second-order reference {reference:.6g}"
        )


def outputs(rounds: int) -> dict[str, str]:
    names = {"best": "symreg_best.csv"}
    names.update(
        {f"history_{i}": f"symreg_history_{i}.csv" for i in range(rounds)}
    )
    return names


@log_time_and_error_sync
def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    if args.population is None and args.paper_scale:
        args.population = settings.FULL_GP_POPULATION
    if args.dataset is None and args.synthetic is None:
        args.synthetic = SyntheticTarget.SERIES2.value
    config = GpConfig.from_settings(
        population_size=args.population,
        generations=args.generations,
        parsimony=args.parsimony,
        independent_runs=args.rounds,
        seed=args.seed,
    )
    args.population = config.population_size
    args.generations = config.generations
    args.parsimony = config.parsimony
    args.rounds = config.independent_runs
    paths = output_paths(args, outputs(config.independent_runs))
    write_manifest(args, NAME, paths)

    if args.dataset:
        dataset = load_dataset(args.dataset)
    else:
        dataset = synthetic_regression_dataset(
            args.rows,
            SYNTHETIC_DIMENSION,
            args.seed,
            SyntheticTarget(args.synthetic),
        )
    if not len(dataset):
        raise EmptyDatasetError("the regression dataset has no row")
    training, held_out = split_dataset(dataset, HOLDOUT_FRACTION, args.seed)

    results = evolve_rounds(config, training, workers=resolve_workers(args))
    simplified = [simplify(result.best) for result in results]
    held_out_errors = [held_out_mse(result.best, held_out) for result in results]
    save_best_expressions(results, held_out_errors, simplified, paths["best"])
    for index, result in enumerate(results):
        save_history(result, paths[f"history_{index}"])

    reference = held_out_mse(second_order_expression(), held_out)
    print_table(
        ["round", "raw_mse", "held_out_mse", "size", "expression"],
        [
            [i, r.best_report.raw_mse, mse, r.best_report.size, to_infix(s)]
            for i, (r, mse, s) in enumerate(zip(results, held_out_errors, simplified))
        ],
    )
    print(f"second-order reference held-out mse: {reference:.6g}")
    # simulated targets only, a synthetic series2 target is the reference itself
    if args.dataset:
        check_against_reference(held_out_errors, reference)
    return 0
