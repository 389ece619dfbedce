"""Resolve command."""

import argparse
from typing import Any

from ...config import RunConfig
from ...pipeline import run_pipeline
from .. import add_input_arguments, add_output_arguments


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the resolve subcommand."""
    parser = subparsers.add_parser(
        "resolve",
        help="Split every package/dependency relation into resolved intervals",
    )
    add_input_arguments(parser)
    add_output_arguments(parser)
    parser.add_argument("--workers", type=int, help="Processes for pair resolution")
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """Write intervals.jsonl, warnings.csv and summary.json."""
    return run_pipeline(config, with_metrics=False)
