"""Metrics command."""

import argparse
from typing import Any

from ...config import RunConfig
from ...pipeline import run_pipeline
from .. import add_input_arguments, add_output_arguments


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the metrics subcommand."""
    parser = subparsers.add_parser(
        "metrics",
        help="Full pipeline: intervals, per-package TOOD/PFET metrics and package filter",
    )
    add_input_arguments(parser)
    add_output_arguments(parser)
    parser.add_argument("--workers", type=int, help="Processes for pair resolution")
    parser.add_argument("--window-start", help="Clip intervals before this instant (RFC 3339)")
    parser.add_argument("--window-end", help="Clip intervals after this instant (RFC 3339)")
    parser.add_argument("--min-versions", type=int, help="Package filter: minimum releases")
    parser.add_argument("--min-age-days", type=float, help="Package filter: minimum age")
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """
    Handle metrics command.

    Returns:
        Run summary; metrics.csv holds one row per package passing the filter
    """
    return run_pipeline(config, with_metrics=True)
