import argparse
from pathlib import Path
from typing import Sequence

from prettytable import PrettyTable

from src.app.models.manifest import RunManifest
from src.app.shared.domain.exceptions import ConfigRejectedError
from src.app.shared.utils.dependencies import get_settings
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)

MANIFEST_FILE = "manifest.json"
# flags that never change what a run computes
EXCLUDED_FROM_MANIFEST = ("handler", "verbose")


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    settings = get_settings()
    parser.add_argument(
        "--seed", type=int, default=settings.SEED, help="master seed (u64)"
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=settings.WORKERS,
        help="parallel workers, defaults to the number of logical cores",
    )
    parser.add_argument(
        "--out", default=settings.OUTPUT_DIR, help="output directory for CSV files"
    )
    parser.add_argument(
        "--paper-scale",
        action="store_true",
        help="n=1000, 500 replicates and GP population 50,000 unless overridden",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument(
        "--timings", action="store_true", help="record wall time in records CSV"
    )


def add_monte_carlo_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=None, help="dimension")
    parser.add_argument(
        "--replicates", type=int, default=None, help="replicates per cell"
    )


def resolve_monte_carlo(args: argparse.Namespace) -> None:
    """Materializes desk-scale or paper-scale defaults for n and replicates."""
    settings = get_settings()
    if args.n is None:
        args.n = settings.FULL_DIMENSION if args.paper_scale else settings.DIMENSION
    if args.replicates is None:
        args.replicates = (
            settings.FULL_REPLICATES if args.paper_scale else settings.REPLICATES
        )


def resolve_workers(args: argparse.Namespace) -> int:
    return args.workers or get_settings().resolved_workers()


def int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}")


def output_paths(args: argparse.Namespace, names: dict[str, str]) -> dict[str, Path]:
    out = Path(args.out)
    return {key: out / name for key, name in names.items()}


def write_manifest(
    args: argparse.Namespace, subcommand: str, outputs: dict[str, Path]
) -> Path:
    settings = get_settings()
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in EXCLUDED_FROM_MANIFEST
    }
    manifest = RunManifest(
        subcommand=subcommand,
        config=config,
        seed=args.seed,
        tool_version=settings.get_tool_version(),
        outputs={key: str(path) for key, path in outputs.items()},
    )
    path = manifest.save(Path(args.out) / MANIFEST_FILE)
    logger.info("manifest subcommand=%s path=%s", subcommand, path)
    return path


def check_positive(name: str, value: int | float) -> None:
    if value <= 0:
        raise ConfigRejectedError(f"--{name} must be positive, got {value}")


def print_table(field_names: Sequence[str], rows: Sequence[Sequence]) -> None:
    table = PrettyTable()
    table.field_names = list(field_names)
    for row in rows:
        table.add_row(
            [f"{value:.6g}" if isinstance(value, float) else value for value in row]
        )
    print(table)
