"""Writers and readers for the output files."""

import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import pandas as pd

from .exceptions import FormatError, InputIOError
from .models import IntervalRecord, PackageMetrics, WarningRecord
from .stats import SampleVector
from .utils import format_timestamp
from .versions import render_version

logger = logging.getLogger(__name__)

METRICS_COLUMNS = (
    "ecosystem",
    "name",
    "n_deps",
    "total_days",
    "tood_days",
    "tood_ratio",
    "tood_ratio_eq2",
    "pfet_days",
    "pfet_ratio",
    "pfet_ratio_eq4",
)
WARNING_COLUMNS = ("stage", "subject", "reason")


def interval_row(record: IntervalRecord) -> dict[str, Any]:
    """JSON object of one interval, keys in output order."""
    eco = record.from_pkg.ecosystem

    def version(v):
        return render_version(eco, v) if v is not None else None

    return {
        "ecosystem": eco.value,
        "from_pkg": record.from_pkg.name,
        "from_version": version(record.from_version),
        "to_pkg": record.to_pkg.name,
        "requirement": record.requirement.source_text if record.requirement else None,
        "resolved": version(record.resolved),
        "highest": version(record.highest),
        "start": format_timestamp(record.start),
        "end": format_timestamp(record.end),
        "is_out_of_date": record.is_out_of_date,
        "is_exposed": record.is_exposed,
        "warning": record.warning.value if record.warning else None,
    }


def write_intervals(path: Path, records: Iterable[IntervalRecord]) -> int:
    """Write intervals.jsonl; returns the number of lines."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(interval_row(record), ensure_ascii=False))
            f.write("\n")
            count += 1
    logger.debug(f"Wrote {count} intervals to {path}")
    return count


def write_table(path: Path, rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> int:
    """Write rows as CSV with a fixed header; None becomes an empty field."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, lineterminator="\n")
    return len(frame)


def write_metrics(path: Path, metrics: Iterable[PackageMetrics]) -> int:
    rows = [
        {"ecosystem": m.pkg.ecosystem.value, "name": m.pkg.name, **m.model_dump(exclude={"pkg"})}
        for m in sorted(metrics, key=lambda m: (m.pkg.ecosystem.value, m.pkg.name))
    ]
    return write_table(path, rows, METRICS_COLUMNS)


def write_warnings(path: Path, warnings: Iterable[WarningRecord]) -> int:
    rows = [{"stage": w.stage.value, "subject": w.subject, "reason": w.reason} for w in warnings]
    return write_table(path, rows, WARNING_COLUMNS)


def write_summary(path: Path, summary: dict[str, Any]):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def write_sample(path: Path, sample: SampleVector) -> int:
    """Single-column sample file for external tools."""
    return write_table(path, [{sample.label: v} for v in sample.values], [sample.label])


def read_metrics(path: Path) -> pd.DataFrame:
    """
    Read a metrics.csv produced by the pipeline.

    Raises:
        InputIOError: If the file does not exist
        FormatError: If the header does not match
    """
    if not path.is_file():
        raise InputIOError(str(path), "file not found")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as e:
        raise FormatError(str(path), "missing header") from e
    missing = [c for c in METRICS_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(str(path), f"header lacks columns {', '.join(missing)}")
    return frame


def metric_samples(frame: pd.DataFrame) -> dict[str, SampleVector]:
    """
    Sample vectors of a metrics table.

    TOOD samples cover every package, PFET samples only packages that were exposed.
    The `paired_*` vectors hold TOOD and PFET of the exposed packages in the same
    package order, for correlations.
    """
    exposed = frame[frame["pfet_days"].notna()]
    columns = {
        "tood_days": frame["tood_days"],
        "pfet_days": exposed["pfet_days"],
        "tood_ratio": frame["tood_ratio"],
        "pfet_ratio": exposed["pfet_ratio"],
        "paired_tood_days": exposed["tood_days"],
        "paired_tood_ratio": exposed["tood_ratio"],
    }
    return {
        label: SampleVector(values=tuple(float(v) for v in series), label=label)
        for label, series in columns.items()
    }


def samples_by_ecosystem(frame: pd.DataFrame) -> dict[str, dict[str, SampleVector]]:
    """metric_samples of each ecosystem in the table, ecosystems in sorted order."""
    return {
        str(ecosystem): metric_samples(group)
        for ecosystem, group in frame.groupby("ecosystem", sort=True)
    }


@contextmanager
def staged_outputs(output_dir: Path) -> Iterator[Path]:
    """
    Directory to write a run's outputs into.

    Files written there are moved into output_dir only when the block completes; if
    it raises, the staging directory is removed and output_dir is left untouched.

    Raises:
        InputIOError: If the output directory cannot be created
    """
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=output_dir))
    except OSError as e:
        raise InputIOError(str(output_dir), str(e)) from e
    try:
        yield staging
        for path in sorted(staging.iterdir()):
            os.replace(path, output_dir / path.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
