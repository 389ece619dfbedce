"""Ingest command."""

import argparse
import logging
from typing import Any

from ...config import RunConfig
from ...pipeline import run_ingest
from .. import add_input_arguments, add_output_arguments

logger = logging.getLogger(__name__)


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the ingest subcommand."""
    parser = subparsers.add_parser(
        "ingest",
        help="Read releases, dependencies and advisories and report counts and warnings",
    )
    add_input_arguments(parser)
    add_output_arguments(parser)
    parser.set_defaults(handler=handle_command)
    return parser


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """
    Handle ingest command.

    Args:
        args: Parsed arguments
        config: Run configuration

    Returns:
        Run summary with input counts and warnings per stage
    """
    summary = run_ingest(config)
    logger.info(f"Ingested {summary['inputs']}")
    return summary
