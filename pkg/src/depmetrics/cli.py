"""Command-line entry point."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .commands import config_overrides
from .commands.analysis import export_samples, fit, stats
from .commands.pipeline import ingest, metrics, resolve, ttu
from .config import build_run_config, load_config, setup_logging
from .exceptions import DepMetricsError, UsageError

logger = logging.getLogger(__name__)

COMMANDS = [ingest, resolve, metrics, ttu, stats, fit, export_samples]

EXIT_OK = 0
EXIT_INTERNAL = 3


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="depmetrics",
        description="Time-out-of-date and post-fix exposure metrics for dependency histories",
    )
    parser.add_argument("--config", type=Path, help="YAML configuration file")
    parser.add_argument("--log-level", help="Override the configured log level")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.get_command(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one subcommand.

    Returns:
        Exit code: 0 success, 1 usage error, 2 input/output or format error,
        3 internal error
    """
    try:
        args = build_parser().parse_args(argv)
        raw = load_config(args.config)
        if args.log_level:
            raw.setdefault("depmetrics", {}).setdefault("logging", {})["level"] = args.log_level
        setup_logging(raw)
        config = build_run_config(raw, config_overrides(args), args.config)
        result = args.handler(args, config)
    except DepMetricsError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print(e.message, file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return EXIT_INTERNAL

    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK
