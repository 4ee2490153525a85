import argparse
import sys
from typing import List, Optional

from loguru import logger

from ensembles.cli import EXIT_ERROR, checks, measures, streams
from ensembles.config import settings
from ensembles.models.errors import EnsembleError
from ensembles.utils.logger import setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ensembles", description=f"{settings.APP_NAME} {settings.APP_VERSION}")
    parser.add_argument("--log-level", help=f"loguru level (default {settings.LOG_LEVEL})")
    parser.add_argument("--log-file", help="also log to this file")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (streams, measures, checks):
        module.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return args.handler(args)
    except EnsembleError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_ERROR
    except (ValueError, OSError) as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
