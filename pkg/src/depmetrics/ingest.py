"""Dataset ingestion: releases.csv, deps.csv and OSV advisories."""

import asyncio
import csv
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Iterator

from .advisories import AdvisoryStore, load_osv, load_osv_dir
from .config import RunConfig
from .ecosystem import Ecosystem
from .exceptions import FormatError, InputIOError, ParseError
from .ledger import WarningLedger
from .models import DependencyEdge, DependencyKind, PackageId, PackageRelease, WarningStage
from .requirements import parse_requirement
from .resolver import ReleaseIndex
from .utils import parse_json_output, parse_timestamp
from .versions import SemVersion, parse_version

logger = logging.getLogger(__name__)

RELEASE_COLUMNS = ("ecosystem", "name", "version", "released_at")
DEPS_COLUMNS = ("ecosystem", "from_name", "from_version", "to_name", "requirement", "kind")

# DictReader key collecting fields beyond the header
_EXTRA_FIELDS = "__extra_fields__"


class Dataset:
    """In-memory stores built from one set of input files."""

    def __init__(
        self,
        index: ReleaseIndex,
        edges: list[DependencyEdge],
        unparseable: list[tuple[PackageId, SemVersion, PackageId]],
        store: AdvisoryStore,
        ledger: WarningLedger,
        row_counts: dict[str, dict[str, int]],
    ):
        """
        Initialize dataset.

        Args:
            index: Release index
            edges: Parsed dependency edges of every kind
            unparseable: Regular edges whose requirement failed to parse
            store: Advisory store
            ledger: Warnings raised while reading
            row_counts: Per input file: rows read, kept, filtered and warned
        """
        self.index = index
        self.edges = edges
        self.unparseable = unparseable
        self.store = store
        self.ledger = ledger
        self.row_counts = row_counts

    def latest_timestamp(self) -> datetime | None:
        """Latest release instant in the dataset (the default cutoff)."""
        latest = None
        for pkg in self.index.packages():
            last = self.index.releases(pkg)[-1].released_at
            if latest is None or last > latest:
                latest = last
        return latest

    def counts(self) -> dict[str, int]:
        return {
            "packages": len(self.index),
            "releases": self.index.total_releases(),
            "edges": len(self.edges),
            "unparseable_edges": len(self.unparseable),
            "advisories": len(self.store),
        }


def _iter_rows(
    path: Path, columns: tuple[str, ...]
) -> Iterator[tuple[int, dict[str, str], str | None]]:
    """
    Yield (line number, row, problem) from a CSV file with a mandatory header.

    `problem` describes a row whose field count differs from the header's; such a
    row is still yielded so the caller can count and ledger it.

    Raises:
        InputIOError: If the file is missing or unreadable
        FormatError: If the header is missing or lacks a required column
    """
    if not path.is_file():
        raise InputIOError(str(path), "file not found")
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f, restkey=_EXTRA_FIELDS, skipinitialspace=True)
            header = [name.strip() for name in reader.fieldnames or []]
            if not header:
                raise FormatError(str(path), "missing header")
            missing = [c for c in columns if c not in header]
            if missing:
                raise FormatError(str(path), f"header lacks columns {', '.join(missing)}")
            reader.fieldnames = header

            for record in reader:
                extra = record.pop(_EXTRA_FIELDS, None)
                problem = None
                if extra is not None:
                    problem = f"{len(extra)} field(s) beyond the {len(header)}-column header"
                elif any(record[name] is None for name in header):
                    problem = f"fewer fields than the {len(header)}-column header"
                row = {c: (record[c] or "").strip() for c in columns}
                yield reader.line_num, row, problem
    except (OSError, UnicodeDecodeError, csv.Error) as e:
        raise InputIOError(str(path), str(e)) from e


def _ecosystem(label: str, allowed: set[Ecosystem] | None) -> Ecosystem | None:
    """Ecosystem of a row, or None when the row falls outside the filter."""
    eco = Ecosystem.from_label(label)
    if allowed and eco not in allowed:
        return None
    return eco


def load_releases(
    path: Path, ledger: WarningLedger, ecosystems: set[Ecosystem] | None = None
) -> tuple[list[PackageRelease], dict[str, int]]:
    """
    Read releases.csv.

    Rows with unsupported ecosystems, non-SEMVER versions or missing timestamps are
    skipped with a warning; a repeated (package, version) keeps the first row.

    Returns:
        (releases, row counts)
    """
    releases: list[PackageRelease] = []
    seen: set[tuple[PackageId, SemVersion]] = set()
    counts = {"read": 0, "kept": 0, "filtered": 0, "warned": 0}
    for line, row, problem in _iter_rows(path, RELEASE_COLUMNS):
        counts["read"] += 1
        subject = f"{path.name}:{line}"
        if problem:
            ledger.record(WarningStage.PARSE_VERSION, subject, problem)
            counts["warned"] += 1
            continue
        try:
            eco = _ecosystem(row["ecosystem"], ecosystems)
            if eco is None:
                counts["filtered"] += 1
                continue
            if not row["name"]:
                raise ParseError(row["name"], reason="empty package name")
            pkg = PackageId(ecosystem=eco, name=row["name"])
            version = parse_version(eco, row["version"])
            if not row["released_at"]:
                raise ParseError(row["version"], reason="release without timestamp")
            released_at = parse_timestamp(row["released_at"])
        except ParseError as e:
            ledger.record(WarningStage.PARSE_VERSION, subject, e.message)
            counts["warned"] += 1
            continue
        if (pkg, version) in seen:
            reason = f"duplicate release {pkg}@{version}"
            ledger.record(WarningStage.PARSE_VERSION, subject, reason)
            counts["warned"] += 1
            continue
        seen.add((pkg, version))
        releases.append(PackageRelease(pkg=pkg, version=version, released_at=released_at))
        counts["kept"] += 1
    logger.info(f"Read {counts['kept']} releases from {path}")
    return releases, counts


def load_deps(
    path: Path, ledger: WarningLedger, ecosystems: set[Ecosystem] | None = None
) -> tuple[list[DependencyEdge], list[tuple[PackageId, SemVersion, PackageId]], dict[str, int]]:
    """
    Read deps.csv.

    Rows whose requirement fails to parse are warned about; regular ones are also
    returned separately so the declaring release still counts as declaring the
    dependency.

    Returns:
        (edges, unparseable regular edges, row counts)
    """
    edges: list[DependencyEdge] = []
    unparseable: list[tuple[PackageId, SemVersion, PackageId]] = []
    seen: set[tuple] = set()
    counts = {"read": 0, "kept": 0, "filtered": 0, "warned": 0}
    for line, row, problem in _iter_rows(path, DEPS_COLUMNS):
        counts["read"] += 1
        subject = f"{path.name}:{line}"
        if problem:
            ledger.record(WarningStage.PARSE_VERSION, subject, problem)
            counts["warned"] += 1
            continue
        try:
            eco = _ecosystem(row["ecosystem"], ecosystems)
            if eco is None:
                counts["filtered"] += 1
                continue
            if not row["from_name"] or not row["to_name"]:
                raise ParseError(row["from_name"] or row["to_name"], reason="empty package name")
            from_pkg = PackageId(ecosystem=eco, name=row["from_name"])
            to_pkg = PackageId(ecosystem=eco, name=row["to_name"])
            from_version = parse_version(eco, row["from_version"])
            kind = DependencyKind((row["kind"] or DependencyKind.REGULAR.value).lower())
        except (ParseError, ValueError) as e:
            ledger.record(WarningStage.PARSE_VERSION, subject, getattr(e, "message", str(e)))
            counts["warned"] += 1
            continue

        key = (from_pkg, from_version, to_pkg, kind)
        if from_pkg == to_pkg or key in seen:
            reason = "self-dependency" if from_pkg == to_pkg else "duplicate dependency row"
            ledger.record(WarningStage.PARSE_REQUIREMENT, subject, reason)
            counts["warned"] += 1
            continue
        seen.add(key)

        try:
            requirement = parse_requirement(eco, row["requirement"])
        except ParseError as e:
            ledger.record(WarningStage.PARSE_REQUIREMENT, subject, e.message)
            counts["warned"] += 1
            if kind is DependencyKind.REGULAR:
                unparseable.append((from_pkg, from_version, to_pkg))
            continue
        edges.append(
            DependencyEdge(
                from_pkg=from_pkg,
                from_version=from_version,
                to_pkg=to_pkg,
                requirement=requirement,
                kind=kind,
            )
        )
        counts["kept"] += 1
    logger.info(f"Read {counts['kept']} dependency edges from {path}")
    return edges, unparseable, counts


def load_advisories(
    path: Path | None,
    ledger: WarningLedger,
    ecosystems: set[Ecosystem] | None = None,
    concurrency: int = 32,
) -> AdvisoryStore:
    """
    Load OSV advisories from a directory of JSON files or from one JSON file.

    Raises:
        InputIOError: If the path does not exist
    """
    if path is None:
        return AdvisoryStore()
    if path.is_dir():
        return asyncio.run(load_osv_dir(path, ledger, ecosystems, concurrency))
    if not path.is_file():
        raise InputIOError(str(path), "advisory path not found")
    try:
        data: Any = parse_json_output(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InputIOError(str(path), str(e)) from e
    if data is None:
        raise FormatError(str(path), "not valid JSON")
    documents = data if isinstance(data, list) else [data]
    return load_osv([d for d in documents if isinstance(d, dict)], ledger, ecosystems)


def ingest(config: RunConfig) -> Dataset:
    """
    Build the release index, edge set and advisory store for a run.

    Row problems become warnings; missing files and headers abort.

    Raises:
        InputIOError: If an input file is missing or unreadable
        FormatError: If an input file lacks its header
    """
    ledger = WarningLedger()
    allowed = set(config.ecosystems) or None

    releases, release_counts = load_releases(config.releases_path, ledger, allowed)
    edges, unparseable, dep_counts = load_deps(config.deps_path, ledger, allowed)
    index = ReleaseIndex(releases, include_prereleases=config.include_prereleases)

    advisory_ecosystems = allowed or {pkg.ecosystem for pkg in index.packages()}
    store = load_advisories(
        config.advisories_path, ledger, advisory_ecosystems, config.osv_read_concurrency
    )

    dataset = Dataset(
        index=index,
        edges=edges,
        unparseable=unparseable,
        store=store,
        ledger=ledger,
        row_counts={"releases": release_counts, "deps": dep_counts},
    )
    logger.info(f"Ingested {dataset.counts()} with {len(ledger)} warnings")
    return dataset
