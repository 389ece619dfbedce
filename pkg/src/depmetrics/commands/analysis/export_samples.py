"""Export-samples command."""

import argparse
from typing import Any

from ...config import RunConfig
from ...pipeline import run_export_samples
from .. import add_metrics_input_argument, add_output_arguments


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the export-samples subcommand."""
    parser = subparsers.add_parser(
        "export-samples",
        help="Write tood.csv and pfet.csv for tests run with external tools",
    )
    add_metrics_input_argument(parser)
    add_output_arguments(parser)
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """
    Handle export-samples command.

    Returns:
        Number of values written per file
    """
    return run_export_samples(config, args.metrics)
