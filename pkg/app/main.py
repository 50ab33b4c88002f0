"""
Main CLI Application
"""
import argparse
import sys
from typing import List, Optional

from app.commands import COMMAND_MODULES
from app.commands.common import run_guarded
from app.core import configure_logging, configure_torch
from app.core.config import settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loupe",
        description=f"{settings.app_name} {settings.app_version}: learned k-space under-sampling and reconstruction",
    )
    parser.add_argument("--log-level", help="Override LOUPE_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMAND_MODULES:
        module.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, set up logging and torch, and run one command.

    Returns:
        Process exit code (0 ok, 2 usage/config, 3 I/O, 4 divergence, 5 calibration)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level)
    configure_torch()
    return run_guarded(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
