import argparse

import numpy as np

from src.app.analytics.services.sweeps import open_grid
from src.app.api.commands.command_utils import (
    add_common_arguments,
    add_monte_carlo_arguments,
    output_paths,
    print_table,
    resolve_monte_carlo,
    resolve_workers,
    write_manifest,
)
from src.app.montecarlo.models.experiment import ExperimentConfig, Metric
from src.app.montecarlo.models.validation import ValidationReport
from src.app.montecarlo.services.harness import run_grid
from src.app.montecarlo.services.persistence import save_records, write_rows
from src.app.montecarlo.services.validation import (
    build_report,
    link_checks,
    region_checks,
    series_checks,
)
from src.app.shared.domain.constants import VALIDATION_HEADER, VALIDATION_SCHEMA
from src.app.shared.domain.exceptions import (
    ConfigRejectedError,
    ValidationFailedError,
)
from src.app.utils.decorators import log_time_and_error_sync

NAME = "validate"
HELP = "check the closed forms against Monte Carlo simulations"
OUTPUTS = {"records": "validate_records.csv", "report": "validation.csv"}

SAMPLE_QS = (0.25, 0.5, 0.75)
SAMPLE_P = 1.0
ORACLE_PS = (0.5, 1.0, 3.0)
ORACLE_QS = (0.5, 1.0, 2.0, 4.0)
MOMENT_Q = 0.5
IN_OUT_Q = 0.5
# passed means |empirical - expected| <= tolerance, not a bound on z
TABLE_COLUMNS = [
    "check",
    "n",
    "q",
    "p",
    "metric",
    "analytic",
    "expected",
    "empirical",
    "stderr",
    "z",
    "tolerance",
    "passed",
]


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    add_common_arguments(parser)
    add_monte_carlo_arguments(parser)
    parser.add_argument("--q", type=float, default=None, help="single-cell q")
    population = parser.add_mutually_exclusive_group()
    population.add_argument("--p", type=float, default=None, help="single-cell p")
    population.add_argument(
        "--qstar", type=float, default=None, help="single-cell q* = p / (1 + p)"
    )
    parser.add_argument(
        "--metric",
        choices=[metric.value for metric in Metric],
        default=None,
        help="single-cell metric; without --q or --metric the full grid runs",
    )
    parser.set_defaults(handler=run)


def single_cell(args: argparse.Namespace) -> list[ExperimentConfig]:
    q = 0.5 if args.q is None else args.q
    metric = Metric(args.metric or Metric.KL_SAMPLE)
    common = dict(n=args.n, q=q, replicates=args.replicates, seed=args.seed)
    if args.qstar is not None:
        return [ExperimentConfig.from_qstar(args.qstar, metrics=(metric,), **common)]
    p = SAMPLE_P if args.p is None else args.p
    return [ExperimentConfig(p=p, metrics=(metric,), **common)]


def acceptance_grid(args: argparse.Namespace) -> tuple[list[ExperimentConfig], int]:
    """
    Cells for the sample KL (random and identity population), the Oracle grid,
    the Wishart moments and the in-sample against out-of-sample KL. Returns the
    grid and the number of sample-KL cells, which come first with their
    identity twins right after.
    """
    common = dict(n=args.n, replicates=args.replicates, seed=args.seed)
    grid = [
        ExperimentConfig(q=q, p=SAMPLE_P, metrics=(Metric.KL_SAMPLE,), **common)
        for q in SAMPLE_QS
    ]
    grid += [
        ExperimentConfig(q=q, p=0.0, metrics=(Metric.KL_SAMPLE,), **common)
        for q in SAMPLE_QS
    ]
    grid += [
        ExperimentConfig(
            q=q,
            p=p,
            metrics=(Metric.KL_ORACLE, Metric.FROBENIUS_ORACLE),
            **common,
        )
        for p in ORACLE_PS
        for q in ORACLE_QS
    ]
    grid.append(
        ExperimentConfig(
            q=MOMENT_Q,
            p=0.0,
            metrics=(Metric.TAU_INV_WISHART, Metric.LOG_DET_WISHART),
            **common,
        )
    )
    grid.append(
        ExperimentConfig(q=IN_OUT_Q, p=SAMPLE_P, metrics=(Metric.KL_IN_OUT,), **common)
    )
    return grid, len(SAMPLE_QS)


def numeric_checks():
    qs = open_grid(0.0, 7.0, 50)
    qstars = open_grid(0.0, 1.0, 20)
    return (
        series_checks(qs, qstars)
        + region_checks(list(np.linspace(4.5, 7.0, 11)))
        + link_checks()
    )


def save_report(report: ValidationReport, path) -> None:
    rows = [
        [
            VALIDATION_SCHEMA,
            check.check.value,
            check.n,
            float(check.q),
            float(check.p),
            check.metric,
            float(check.analytic),
            float(check.analytic if check.expected is None else check.expected),
            float(check.empirical),
            float(check.stderr),
            float(check.z),
            float(check.tolerance),
            str(check.passed).lower(),
        ]
        for check in report.checks
    ]
    write_rows(path, VALIDATION_HEADER, rows)


@log_time_and_error_sync
def run(args: argparse.Namespace) -> int:
    resolve_monte_carlo(args)
    paths = output_paths(args, OUTPUTS)
    write_manifest(args, NAME, paths)

    single = any(v is not None for v in (args.q, args.metric, args.p, args.qstar))
    if single:
        grid, pairs = single_cell(args), 0
    else:
        grid, pairs = acceptance_grid(args)

    outcome = run_grid(
        grid, workers=resolve_workers(args), record_walltime=args.timings
    )
    if outcome.failures:
        failed = ", ".join(f"cell {f.cell}: {f.message}" for f in outcome.failures)
        raise ConfigRejectedError(f"simulation failed ({failed})")
    save_records(outcome.records, paths["records"])

    records = outcome.records
    report = build_report(
        records,
        independence_pairs=list(zip(records[:pairs], records[pairs : 2 * pairs])),
        numeric_checks=[] if single else numeric_checks(),
    )
    save_report(report, paths["report"])
    print_table(
        TABLE_COLUMNS,
        [
            [c.check.value, c.n, c.q, c.p, c.metric, c.analytic]
            + [c.analytic if c.expected is None else c.expected, c.empirical]
            + [c.stderr, c.z, c.tolerance, "pass" if c.passed else "FAIL"]
            for c in report.checks
            if c.check.value in ("monte_carlo", "population_independence")
        ],
    )
    print(f"{len(report.checks) - len(report.failures)}/{len(report.checks)} passed")
    if not report.passed:
        raise ValidationFailedError(
            f"{len(report.failures)} of {len(report.checks)} checks failed"
        )
    return 0
