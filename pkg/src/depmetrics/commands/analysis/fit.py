"""Fit command."""

import argparse
from typing import Any

from ...config import RunConfig
from ...pipeline import run_fit
from .. import add_metrics_input_argument, add_output_arguments


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the fit subcommand."""
    parser = subparsers.add_parser(
        "fit", help="Exponential fit of TOOD and PFET days with a KS goodness-of-fit check"
    )
    add_metrics_input_argument(parser)
    add_output_arguments(parser)
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    return {"fits": run_fit(config, args.metrics)}
