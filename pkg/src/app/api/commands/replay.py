import argparse

from src.app.models.manifest import RunManifest
from src.app.utils.logger import logger as utils_logger

logger = utils_logger(__name__)

NAME = "replay"
HELP = "rerun a subcommand from its manifest"


def register(subparsers) -> None:
    parser = subparsers.add_parser(NAME, help=HELP)
    parser.add_argument("--manifest", required=True, help="manifest.json of a run")
    parser.add_argument(
        "--out", default=None, help="output directory, the manifest's by default"
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    # imported here, the registry imports this module
    from src.app.api.api import command_handlers

    manifest = RunManifest.load(args.manifest)
    replayed = argparse.Namespace(**manifest.config)
    if args.out is not None:
        replayed.out = args.out
    logger.info(
        "replay subcommand=%s manifest=%s out=%s",
        manifest.subcommand,
        args.manifest,
        replayed.out,
    )
    return command_handlers()[manifest.subcommand](replayed)
