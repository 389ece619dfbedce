"""Stats command."""

import argparse
import logging
from typing import Any

from pydantic import ValidationError

from ...config import RunConfig
from ...exceptions import UsageError
from ...pipeline import run_stats
from ...stats import StatsConfig
from .. import add_metrics_input_argument, add_output_arguments

logger = logging.getLogger(__name__)


def get_command(subparsers) -> argparse.ArgumentParser:
    """Register the stats subcommand."""
    parser = subparsers.add_parser(
        "stats",
        help="Describe, ECDF/QQ, correlations and subsampled KS/MW tests over metrics.csv",
    )
    add_metrics_input_argument(parser)
    add_output_arguments(parser)
    parser.add_argument("--alpha", type=float, help="Significance level")
    parser.add_argument("--repetitions", type=int, help="Subsampling repetitions per cell")
    parser.add_argument("--sample-size", type=int, action="append", dest="sample_sizes")
    parser.add_argument("--threshold", type=float, action="append", dest="max_tood_thresholds")
    parser.add_argument("--seed", type=int, dest="rng_seed", help="Random seed")
    parser.set_defaults(handler=handle_command)
    return parser


def stats_overrides(args: argparse.Namespace, config: RunConfig) -> RunConfig:
    """Apply stats flags on top of the configured StatsConfig."""
    updates = {
        name: getattr(args, name)
        for name in ("alpha", "repetitions", "sample_sizes", "max_tood_thresholds", "rng_seed")
        if getattr(args, name, None) is not None
    }
    if not updates:
        return config
    try:
        stats = StatsConfig(**{**config.stats.model_dump(), **updates})
    except ValidationError as e:
        raise UsageError(f"invalid stats option: {e}") from e
    return config.model_copy(update={"stats": stats})


def handle_command(args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    """
    Handle stats command.

    Returns:
        Describe rows, correlation rows and the number of subsampling cells
    """
    config = stats_overrides(args, config)
    logger.info(
        f"Subsampling {config.stats.repetitions} repetitions over "
        f"{len(config.stats.sample_sizes)} sizes and "
        f"{len(config.stats.max_tood_thresholds)} thresholds"
    )
    return run_stats(config, args.metrics)
