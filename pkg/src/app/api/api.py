# src/app/api/api.py

import argparse
from typing import Callable

from src.app.api.commands import dataset, region, replay, sweep, symreg, validate
from src.app.core.config import settings

COMMANDS = (validate, sweep, region, dataset, symreg, replay)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME, description=settings.DESCRIPTION
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.VERSION}"
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def command_handlers() -> dict[str, Callable[[argparse.Namespace], int]]:
    return {command.NAME: command.run for command in COMMANDS}
