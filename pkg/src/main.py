# /src/main.py

import sys

from src.app.api.api import build_parser
from src.app.shared.domain.exceptions import handle_error
from src.app.utils.logger import logger as utils_logger
from src.app.utils.logger import set_verbosity

logger = utils_logger(__name__)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    set_verbosity(args.verbose)
    try:
        args.handler(args)
    except Exception as e:
        return handle_error(e)
    return handle_error(None)


if __name__ == "__main__":
    sys.exit(main())
