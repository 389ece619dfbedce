"""End-to-end runs: ingestion, temporal resolution, metrics and statistics."""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .config import RunConfig
from .exceptions import DegenerateInputError, EmptyInputError, ZeroMeanError
from .export import (
    metric_samples,
    read_metrics,
    samples_by_ecosystem,
    staged_outputs,
    write_intervals,
    write_metrics,
    write_sample,
    write_summary,
    write_table,
    write_warnings,
)
from .ingest import Dataset, ingest
from .metrics import aggregate_packages, clip_records, filter_packages, release_stats, ttu_table
from .stats import (
    SampleVector,
    StatsConfig,
    correlations,
    describe,
    ecdf_points,
    fit_exponential,
    qq_pairs,
    subsample_protocol,
)
from .timeline import TimelineEngine, check_timeline, group_requirements, iter_records
from .utils import format_timestamp, sha256_file
from .versions import render_version

logger = logging.getLogger(__name__)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

TTU_COLUMNS = (
    "ecosystem",
    "from_pkg",
    "from_version",
    "from_released_at",
    "to_pkg",
    "requirement",
    "resolved",
    "resolved_released_at",
    "ttu_days",
)
DESCRIBE_COLUMNS = ("ecosystem", "label", "count", "mean", "stddev", "min", "max")
CORRELATION_COLUMNS = (
    "ecosystem",
    "metric",
    "n",
    "pearson",
    "spearman",
    "kendall_tau_b",
    "status",
)
SUBSAMPLE_COLUMNS = (
    "ecosystem",
    "threshold",
    "sample_size",
    "test",
    "repetitions",
    "median_p",
    "rejection_fraction",
    "status",
)
FIT_COLUMNS = ("ecosystem", "label", "n", "rate", "ks_statistic", "ks_gof_p", "note")
ECDF_COLUMNS = ("ecosystem", "value", "fraction")
QQ_COLUMNS = ("ecosystem", "quantile", "tood", "pfet")
_STATS_FILES = {
    "describe": ("describe.csv", DESCRIBE_COLUMNS),
    "ecdf_tood": ("ecdf_tood.csv", ECDF_COLUMNS),
    "ecdf_pfet": ("ecdf_pfet.csv", ECDF_COLUMNS),
    "qq_days": ("qq.csv", QQ_COLUMNS),
    "qq_ratio": ("qq_ratio.csv", QQ_COLUMNS),
    "correlations": ("correlations.csv", CORRELATION_COLUMNS),
    "subsample": ("subsample.csv", SUBSAMPLE_COLUMNS),
}


def _cutoff(config: RunConfig, dataset: Dataset) -> datetime:
    return config.cutoff or dataset.latest_timestamp() or EPOCH


def _hashes(directory: Path, names: list[str]) -> dict[str, str]:
    return {name: sha256_file(directory / name) for name in names}


def _base_summary(config: RunConfig, dataset: Dataset) -> dict[str, Any]:
    return {
        "inputs": dataset.counts(),
        "rows": dataset.row_counts,
        "config": {
            "ecosystems": [e.value for e in config.ecosystems],
            "include_prereleases": config.include_prereleases,
            "min_versions": config.min_versions,
            "min_age_days": config.min_age_days,
            "window_start": format_timestamp(config.window_start) if config.window_start else None,
            "window_end": format_timestamp(config.window_end) if config.window_end else None,
        },
    }


def run_ingest(config: RunConfig) -> dict[str, Any]:
    """Read the inputs and write warnings.csv and summary.json."""
    dataset = ingest(config)
    with staged_outputs(config.output_dir) as staging:
        write_warnings(staging / "warnings.csv", dataset.ledger.rows())
        summary = _base_summary(config, dataset)
        summary["warnings"] = dataset.ledger.counts()
        summary["outputs"] = _hashes(staging, ["warnings.csv"])
        write_summary(staging / "summary.json", summary)
    return summary


def run_pipeline(config: RunConfig, with_metrics: bool = True) -> dict[str, Any]:
    """
    Run ingestion, temporal resolution and (optionally) metric aggregation.

    Writes intervals.jsonl, warnings.csv and summary.json, plus metrics.csv when
    metrics are requested. Outputs are byte-identical for identical inputs and
    configuration, whatever the worker count; nothing is written if a stage fails.

    Args:
        config: Run configuration
        with_metrics: Aggregate and filter package metrics

    Returns:
        The run summary as written to summary.json
    """
    dataset = ingest(config)
    cutoff = _cutoff(config, dataset)
    logger.info(f"Lifetimes end at {format_timestamp(cutoff)}")

    history = group_requirements(dataset.edges, dataset.unparseable)
    engine = TimelineEngine(dataset.index, dataset.store, cutoff, workers=config.workers)
    timelines, warnings = engine.run(history)
    dataset.ledger.extend(warnings)
    for timeline in timelines:
        check_timeline(timeline)
    records = list(iter_records(timelines))

    with staged_outputs(config.output_dir) as staging:
        outputs = ["intervals.jsonl", "warnings.csv"]
        write_intervals(staging / "intervals.jsonl", records)

        summary = _base_summary(config, dataset)
        summary["cutoff"] = format_timestamp(cutoff)
        summary["pairs"] = len(timelines)
        summary["intervals"] = len(records)

        if with_metrics:
            clipped = clip_records(records, config.window_start, config.window_end)
            pair_summaries, metrics = aggregate_packages(clipped)
            stats_by_pkg = release_stats(dataset.index)
            kept = filter_packages(
                metrics,
                {pkg: s.count for pkg, s in stats_by_pkg.items()},
                {pkg: s.age_days for pkg, s in stats_by_pkg.items()},
                min_versions=config.min_versions,
                min_age_days=config.min_age_days,
            )
            write_metrics(staging / "metrics.csv", kept)
            outputs.insert(1, "metrics.csv")
            summary["aggregated_pairs"] = len(pair_summaries)
            summary["metrics"] = {"before_filter": len(metrics), "after_filter": len(kept)}

        write_warnings(staging / "warnings.csv", dataset.ledger.rows())
        summary["warnings"] = dataset.ledger.counts()
        summary["outputs"] = _hashes(staging, outputs)
        write_summary(staging / "summary.json", summary)

    logger.info(f"Wrote {', '.join(outputs)} and summary.json to {config.output_dir}")
    return summary


def run_ttu(config: RunConfig, at: datetime | None = None) -> list[dict[str, Any]]:
    """Write ttu.csv: naive time-to-update of every regular edge, resolved at `at`."""
    dataset = ingest(config)
    at = at or _cutoff(config, dataset)
    table = ttu_table(dataset.edges, dataset.index, at, dataset.ledger)
    rows = [
        {
            "ecosystem": row.from_pkg.ecosystem.value,
            "from_pkg": row.from_pkg.name,
            "from_version": render_version(row.from_pkg.ecosystem, row.from_version),
            "from_released_at": format_timestamp(row.from_released_at),
            "to_pkg": row.to_pkg.name,
            "requirement": row.requirement,
            "resolved": render_version(row.to_pkg.ecosystem, row.resolved),
            "resolved_released_at": format_timestamp(row.resolved_released_at),
            "ttu_days": row.ttu_days,
        }
        for row in table
    ]
    with staged_outputs(config.output_dir) as staging:
        write_table(staging / "ttu.csv", rows, TTU_COLUMNS)
        write_warnings(staging / "warnings.csv", dataset.ledger.rows())
    return rows


def _metrics_path(config: RunConfig, metrics_path: Path | None) -> Path:
    return metrics_path or config.output_dir / "metrics.csv"


def _ecosystem_stats(
    ecosystem: str, samples: dict[str, SampleVector], cfg: StatsConfig
) -> dict[str, list[dict[str, Any]]]:
    tood, pfet = samples["tood_days"], samples["pfet_days"]
    key = {"ecosystem": ecosystem}
    rows: dict[str, list[dict[str, Any]]] = {
        "describe": [
            {**key, **describe(samples[label]).model_dump()}
            for label in ("tood_days", "pfet_days", "tood_ratio", "pfet_ratio")
            if len(samples[label])
        ],
        "ecdf_tood": [
            {**key, "value": x, "fraction": p} for x, p in (ecdf_points(tood) if len(tood) else [])
        ],
        "ecdf_pfet": [
            {**key, "value": x, "fraction": p} for x, p in (ecdf_points(pfet) if len(pfet) else [])
        ],
        "qq_days": [],
        "qq_ratio": [],
        "correlations": [],
        "subsample": [],
    }

    if len(tood) and len(pfet):
        for metric in ("days", "ratio"):
            pairs = qq_pairs(samples[f"tood_{metric}"], samples[f"pfet_{metric}"], cfg.qq_quantiles)
            rows[f"qq_{metric}"] = [
                {**key, "quantile": i / (cfg.qq_quantiles - 1), "tood": x, "pfet": y}
                for i, (x, y) in enumerate(pairs)
            ]
        cells = subsample_protocol(tood, pfet, cfg)
        rows["subsample"] = [{**key, **cell.model_dump(mode="json")} for cell in cells]

    for metric in ("days", "ratio"):
        paired_tood, paired_pfet = samples[f"paired_tood_{metric}"], samples[f"pfet_{metric}"]
        try:
            result = correlations(paired_tood.values, paired_pfet.values)
            rows["correlations"].append(
                {**key, "metric": metric, **result.model_dump(), "status": "ok"}
            )
        except (EmptyInputError, DegenerateInputError) as e:
            logger.warning(f"Correlations on {ecosystem} {metric} skipped: {e.message}")
            rows["correlations"].append(
                {**key, "metric": metric, "n": len(paired_tood), "status": e.message}
            )
    return rows


def run_stats(config: RunConfig, metrics_path: Path | None = None) -> dict[str, Any]:
    """
    Statistics over a metrics.csv, computed per ecosystem: describe.csv,
    ecdf_tood.csv, ecdf_pfet.csv, qq.csv, qq_ratio.csv, correlations.csv and
    subsample.csv. Every row carries its ecosystem.

    Statistics that are undefined for the data (empty or constant samples) are
    skipped with a log message rather than failing the run.
    """
    groups = samples_by_ecosystem(read_metrics(_metrics_path(config, metrics_path)))
    tables: dict[str, list[dict[str, Any]]] = {name: [] for name in _STATS_FILES}
    for ecosystem, samples in groups.items():
        logger.info(f"Statistics for {ecosystem}: {len(samples['tood_days'])} packages")
        for name, rows in _ecosystem_stats(ecosystem, samples, config.stats).items():
            tables[name].extend(rows)

    with staged_outputs(config.output_dir) as staging:
        for name, (filename, columns) in _STATS_FILES.items():
            write_table(staging / filename, tables[name], columns)
    return {
        "ecosystems": list(groups),
        "describe": tables["describe"],
        "correlations": tables["correlations"],
        "cells": len(tables["subsample"]),
    }


def run_fit(config: RunConfig, metrics_path: Path | None = None) -> list[dict[str, Any]]:
    """Write fit.csv: exponential fit of the TOOD and PFET day samples of each ecosystem."""
    groups = samples_by_ecosystem(read_metrics(_metrics_path(config, metrics_path)))
    rows = []
    for ecosystem, samples in groups.items():
        for label in ("tood_days", "pfet_days"):
            try:
                fit = fit_exponential(samples[label])
                rows.append({"ecosystem": ecosystem, **fit.model_dump()})
            except (EmptyInputError, ZeroMeanError) as e:
                logger.warning(f"Exponential fit of {ecosystem} {label} skipped: {e.message}")
    with staged_outputs(config.output_dir) as staging:
        write_table(staging / "fit.csv", rows, FIT_COLUMNS)
    return rows


def run_export_samples(config: RunConfig, metrics_path: Path | None = None) -> dict[str, int]:
    """Write tood.csv and pfet.csv, one value per line, for external test suites."""
    samples = metric_samples(read_metrics(_metrics_path(config, metrics_path)))
    with staged_outputs(config.output_dir) as staging:
        return {
            "tood.csv": write_sample(staging / "tood.csv", samples["tood_days"]),
            "pfet.csv": write_sample(staging / "pfet.csv", samples["pfet_days"]),
        }
