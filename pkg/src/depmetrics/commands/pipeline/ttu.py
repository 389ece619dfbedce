"""TTU command."""

import argparse
from typing import Any

from ...config import RunConfig
from ...exceptions import ParseError, UsageError
from ...pipeline import run_ttu
from ...utils import parse_timestamp
from .. import add_input_arguments, add_output_arguments


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the ttu subcommand."""
    parser = subparsers.add_parser(
        "ttu",
        help="Naive time-to-update per edge: importing release minus resolved release",
    )
    add_input_arguments(parser)
    add_output_arguments(parser)
    parser.add_argument("--at", help="Resolution instant (RFC 3339); defaults to the cutoff")
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """
    Handle ttu command.

    Raises:
        UsageError: If --at is not a timestamp
    """
    at = None
    if args.at:
        try:
            at = parse_timestamp(args.at)
        except ParseError as e:
            raise UsageError(f"--at: {e.message}") from e
    rows = run_ttu(config, at)
    return {"rows": len(rows), "ttu_days": [row["ttu_days"] for row in rows]}
