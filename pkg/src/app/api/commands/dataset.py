import argparse

from src.app.analytics.services.sweeps import open_grid
from src.app.api.commands.command_utils import (
    add_common_arguments,
    add_monte_carlo_arguments,
    check_positive,
    output_paths,
    print_table,
    resolve_monte_carlo,
    resolve_workers,
    write_manifest,
)
from src.app.montecarlo.services.datasets import (
    SyntheticTarget,
    build_regression_dataset,
    parameter_grid,
    random_grid,
    synthetic_regression_dataset,
)
from src.app.montecarlo.services.harness import run_grid
from src.app.montecarlo.services.persistence import save_dataset, save_records
from src.app.shared.domain.exceptions import EmptyDatasetError
from src.app.utils.decorators import log_time_and_error_sync

NAME = "dataset"
HELP = "simulate the (q, q*, r, KL) regression dataset"
OUTPUTS = {"dataset": "dataset.csv", "records": "dataset_records.csv"}
QSTAR_RANGE = (0.05, 0.95)
Q_MIN = 0.05


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    add_common_arguments(parser)
    add_monte_carlo_arguments(parser)
    parser.add_argument(
        "--mode", choices=["random", "grid"], default="random", help="cell layout"
    )
    parser.add_argument("--cells", type=int, default=200, help="random cells")
    parser.add_argument("--grid-q", type=int, default=20, help="q grid points")
    parser.add_argument("--grid-qstar", type=int, default=10, help="q* grid points")
    parser.add_argument("--q-max", type=float, default=4.0, help="q upper end")
    parser.add_argument(
        "--synthetic",
        choices=[target.value for target in SyntheticTarget],
        default=None,
        help="write noiseless rows of a known target instead of simulating",
    )
    parser.add_argument("--rows", type=int, default=500, help="synthetic rows")
    parser.set_defaults(handler=run)


@log_time_and_error_sync
def run(args: argparse.Namespace) -> int:
    resolve_monte_carlo(args)
    check_positive("q-max", args.q_max)
    paths = output_paths(args, OUTPUTS)
    if args.synthetic:
        paths.pop("records")
    write_manifest(args, NAME, paths)

    if args.synthetic:
        check_positive("rows", args.rows)
        dataset = synthetic_regression_dataset(
            args.rows,
            args.n,
            args.seed,
            SyntheticTarget(args.synthetic),
            q_range=(Q_MIN, args.q_max),
            qstar_range=QSTAR_RANGE,
        )
    else:
        if args.mode == "random":
            grid = random_grid(
                args.cells,
                args.n,
                args.replicates,
                args.seed,
                q_range=(Q_MIN, args.q_max),
                qstar_range=QSTAR_RANGE,
            )
        else:
            grid = parameter_grid(
                open_grid(0.0, args.q_max, args.grid_q),
                open_grid(0.0, 1.0, args.grid_qstar),
                args.n,
                args.replicates,
                args.seed,
            )
        outcome = run_grid(
            grid, workers=resolve_workers(args), record_walltime=args.timings
        )
        save_records(outcome.records, paths["records"])
        dataset = build_regression_dataset(outcome.records)
        if outcome.failures:
            print(f"{len(outcome.failures)} cells failed and were left out")

    if not len(dataset):
        raise EmptyDatasetError("the dataset has no row")
    save_dataset(dataset, paths["dataset"])
    print_table(
        ["q", "qstar", "r_finite", "target_kl_norm", "stderr"],
        [
            [row.q, row.qstar, row.r_finite, row.target_kl_norm, row.stderr]
            for row in dataset.rows[:10]
        ],
    )
    print(f"{len(dataset)} rows written to {paths['dataset']}")
    return 0
