"""Command-line subcommands for depmetrics."""

import argparse
from pathlib import Path
from typing import Any


def add_input_arguments(parser: argparse.ArgumentParser):
    """Input files, dataset filters and resolution settings shared by data commands."""
    parser.add_argument("--releases", type=Path, help="releases.csv")
    parser.add_argument("--deps", type=Path, help="deps.csv")
    parser.add_argument("--advisories", type=Path, help="OSV directory or JSON file")
    parser.add_argument(
        "--ecosystem",
        action="append",
        dest="ecosystems",
        help="Keep only this ecosystem (repeatable): npm, pypi, cargo",
    )
    parser.add_argument("--cutoff", help="End of every lifetime (RFC 3339)")
    parser.add_argument(
        "--include-prereleases",
        action="store_true",
        default=None,
        help="Treat prereleases as resolution candidates",
    )


def add_output_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--output", type=Path, dest="output_dir", help="Output directory")


def add_metrics_input_argument(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--metrics", type=Path, help="metrics.csv to analyse (default: <output>/metrics.csv)"
    )


def config_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """RunConfig fields given on the command line."""
    names = (
        "releases",
        "deps",
        "advisories",
        "ecosystems",
        "cutoff",
        "include_prereleases",
        "output_dir",
        "workers",
        "window_start",
        "window_end",
        "min_versions",
        "min_age_days",
        "rng_seed",
    )
    renamed = {
        "releases": "releases_path",
        "deps": "deps_path",
        "advisories": "advisories_path",
    }
    overrides = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            overrides[renamed.get(name, name)] = value
    return overrides
