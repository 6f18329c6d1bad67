import argparse

from src.app.analytics.services.sweeps import open_grid, series_sweep
from src.app.api.commands.command_utils import (
    add_common_arguments,
    add_monte_carlo_arguments,
    check_positive,
    int_list,
    output_paths,
    print_table,
    resolve_monte_carlo,
    resolve_workers,
    write_manifest,
)
from src.app.montecarlo.models.experiment import ExperimentConfig, Metric
from src.app.montecarlo.services.harness import run_grid
from src.app.montecarlo.services.persistence import write_rows
from src.app.shared.domain.constants import SWEEP_HEADER, SWEEP_SCHEMA
from src.app.shared.domain.exceptions import ReplicateFailedError
from src.app.utils.decorators import log_time_and_error_sync

NAME = "sweep"
HELP = "partial sums of the Oracle KL series against the closed form"
OUTPUTS = {"sweep": "sweep.csv"}


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    add_common_arguments(parser)
    add_monte_carlo_arguments(parser)
    parser.add_argument(
        "--orders", type=int_list, default=[1, 2, 4, 8, 16], help="e.g. 1,2,4,8,16"
    )
    parser.add_argument("--grid-q", type=int, default=50, help="q grid points")
    parser.add_argument("--grid-qstar", type=int, default=20, help="q* grid points")
    parser.add_argument("--q-max", type=float, default=7.0, help="q grid upper end")
    parser.add_argument(
        "--empirical",
        action="store_true",
        help="add Monte Carlo means of the Oracle KL for every grid cell",
    )
    parser.set_defaults(handler=run)


@log_time_and_error_sync
def run(args: argparse.Namespace) -> int:
    resolve_monte_carlo(args)
    check_positive("q-max", args.q_max)
    paths = output_paths(args, OUTPUTS)
    write_manifest(args, NAME, paths)

    qs = open_grid(0.0, args.q_max, args.grid_q)
    qstars = open_grid(0.0, 1.0, args.grid_qstar)
    points = series_sweep(qs, qstars, args.orders)

    empirical: dict[tuple[float, float], tuple[float, float]] = {}
    if args.empirical:
        grid = [
            ExperimentConfig.from_qstar(
                qstar,
                n=args.n,
                q=q,
                replicates=args.replicates,
                seed=args.seed,
                metrics=(Metric.KL_ORACLE,),
            )
            for qstar in qstars
            for q in qs
        ]
        outcome = run_grid(
            grid, workers=resolve_workers(args), record_walltime=args.timings
        )
        if outcome.failures:
            failure = outcome.failures[0]
            raise ReplicateFailedError(failure.replicate, failure.message)
        for (qstar, q), record in zip(
            [(qstar, q) for qstar in qstars for q in qs], outcome.records
        ):
            summary = record.summaries[Metric.KL_ORACLE]
            empirical[(qstar, q)] = (summary.mean, summary.stderr)

    rows = []
    for point in points:
        mean, stderr = empirical.get((point.qstar, point.q), ("", ""))
        rows.append(
            [
                SWEEP_SCHEMA,
                point.q,
                point.qstar,
                point.order,
                point.partial_sum,
                point.closed_form,
                mean,
                stderr,
            ]
        )
    write_rows(paths["sweep"], SWEEP_HEADER, rows)
    largest = max(args.orders)
    print_table(
        ["q", "qstar", "order", "partial_sum", "closed_form"],
        [
            [p.q, p.qstar, p.order, p.partial_sum, p.closed_form]
            for p in points
            if p.order == largest
        ][:20],
    )
    print(f"{len(rows)} rows written to {paths['sweep']}")
    return 0
