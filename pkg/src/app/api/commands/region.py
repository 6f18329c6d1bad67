import argparse

from src.app.analytics.services.sweeps import open_grid, region_map
from src.app.api.commands.command_utils import (
    add_common_arguments,
    check_positive,
    output_paths,
    write_manifest,
)
from src.app.montecarlo.services.persistence import write_rows
from src.app.shared.domain.constants import REGION_HEADER, REGION_SCHEMA
from src.app.utils.decorators import log_time_and_error_sync

NAME = "region"
HELP = "convergence region rq < 4 of the Oracle KL series"
OUTPUTS = {"region": "region.csv"}


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    add_common_arguments(parser)
    parser.add_argument("--grid-q", type=int, default=50, help="q grid points")
    parser.add_argument("--grid-qstar", type=int, default=20, help="q* grid points")
    parser.add_argument("--q-max", type=float, default=7.0, help="q grid upper end")
    parser.set_defaults(handler=run)


@log_time_and_error_sync
def run(args: argparse.Namespace) -> int:
    check_positive("q-max", args.q_max)
    paths = output_paths(args, OUTPUTS)
    write_manifest(args, NAME, paths)

    cells = region_map(
        open_grid(0.0, args.q_max, args.grid_q), open_grid(0.0, 1.0, args.grid_qstar)
    )
    write_rows(
        paths["region"],
        REGION_HEADER,
        [
            [
                REGION_SCHEMA,
                cell.q,
                cell.qstar,
                cell.rq,
                str(cell.converges).lower(),
                str(cell.boundary).lower(),
            ]
            for cell in cells
        ],
    )
    diverging = sum(not cell.converges for cell in cells)
    print(f"{len(cells)} cells, {diverging} outside the convergence region")
    return 0
