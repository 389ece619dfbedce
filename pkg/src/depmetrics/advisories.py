"""OSV security advisories: ingestion and per-version queries."""

import asyncio
import logging
from collections import defaultdict
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable

import aiofiles

from .ecosystem import Ecosystem
from .exceptions import MalformedDocumentError, ParseError
from .ledger import WarningLedger
from .models import AffectedRange, Advisory, PackageId, WarningStage
from .resolver import ReleaseIndex
from .utils import parse_json_output, parse_timestamp
from .versions import SemVersion, parse_version

logger = logging.getLogger(__name__)

_RANGE_TYPES = ("SEMVER", "ECOSYSTEM")


class AdvisoryStore:
    """Advisories indexed by affected package; immutable after load."""

    def __init__(self, advisories: Iterable[Advisory] = ()):
        grouped: dict[PackageId, list[Advisory]] = defaultdict(list)
        for advisory in advisories:
            grouped[advisory.pkg].append(advisory)
        self._by_package = {
            pkg: tuple(sorted(items, key=lambda a: (a.published_at, a.id)))
            for pkg, items in grouped.items()
        }

    def for_package(self, pkg: PackageId) -> tuple[Advisory, ...]:
        return self._by_package.get(pkg, ())

    def packages(self) -> list[PackageId]:
        return sorted(self._by_package, key=lambda p: (p.ecosystem.value, p.name))

    def __len__(self) -> int:
        return sum(len(items) for items in self._by_package.values())


def _event_version(eco: Ecosystem, value: str) -> SemVersion | None:
    # OSV uses "0" for "every version since the beginning"
    if value in ("0", "0.0.0"):
        return None
    return parse_version(eco, value)


def _parse_range(eco: Ecosystem, raw: dict[str, Any]) -> list[AffectedRange]:
    """Pair introduced/fixed/last_affected events of one OSV range in order."""
    ranges: list[AffectedRange] = []
    introduced: SemVersion | None = None
    open_range = False
    for event in raw.get("events") or []:
        if "introduced" in event:
            if open_range:
                ranges.append(AffectedRange(introduced=introduced))
            introduced = _event_version(eco, str(event["introduced"]))
            open_range = True
        elif "fixed" in event and open_range:
            fixed = parse_version(eco, event["fixed"])
            ranges.append(AffectedRange(introduced=introduced, fixed=fixed))
            open_range = False
        elif "last_affected" in event and open_range:
            ranges.append(
                AffectedRange(
                    introduced=introduced,
                    last_affected=parse_version(eco, event["last_affected"]),
                )
            )
            open_range = False
    if open_range:
        ranges.append(AffectedRange(introduced=introduced))
    return ranges


def parse_osv_document(
    doc: dict[str, Any], ledger: WarningLedger | None = None
) -> list[Advisory]:
    """
    Convert one OSV document into Advisories, one per affected package.

    Affected entries of unsupported ecosystems and ranges with versions outside the
    SEMVER subset are skipped with a warning.

    Raises:
        MalformedDocumentError: If the document lacks an id, a publication time or
            any range or version list
    """
    ledger = ledger or WarningLedger()
    doc_id = doc.get("id")
    if not doc_id:
        raise MalformedDocumentError("<no id>", "missing id")
    try:
        published_at = parse_timestamp(doc.get("published") or "")
    except ParseError as e:
        raise MalformedDocumentError(doc_id, f"bad published time: {e.reason}") from e

    affected = doc.get("affected") or []
    if not affected:
        raise MalformedDocumentError(doc_id, "no affected entries")

    ranges: dict[PackageId, list[AffectedRange]] = defaultdict(list)
    versions: dict[PackageId, set[SemVersion]] = defaultdict(set)
    for entry in affected:
        package = entry.get("package") or {}
        raw_ranges = entry.get("ranges") or []
        raw_versions = entry.get("versions") or []
        if not raw_ranges and not raw_versions:
            raise MalformedDocumentError(doc_id, "affected entry without ranges or versions")
        try:
            eco = Ecosystem.from_label(package.get("ecosystem", ""))
        except ParseError:
            ledger.record(
                WarningStage.ADVISORY,
                doc_id,
                f"ecosystem '{package.get('ecosystem')}' outside the dataset",
            )
            continue
        if not package.get("name"):
            raise MalformedDocumentError(doc_id, "affected package without name")
        pkg = PackageId(ecosystem=eco, name=package["name"])

        for raw in raw_ranges:
            if raw.get("type") not in _RANGE_TYPES:
                skipped = f"range type {raw.get('type')} skipped"
                ledger.record(WarningStage.ADVISORY, doc_id, skipped)
                continue
            try:
                ranges[pkg].extend(_parse_range(eco, raw))
            except (ParseError, ValueError) as e:
                ledger.record(WarningStage.ADVISORY, doc_id, f"range skipped: {e}")
        for text in raw_versions:
            try:
                versions[pkg].add(parse_version(eco, str(text)))
            except ParseError as e:
                ledger.record(WarningStage.ADVISORY, doc_id, f"version skipped: {e.message}")

    advisories = []
    for pkg in sorted(set(ranges) | set(versions), key=lambda p: (p.ecosystem.value, p.name)):
        pkg_ranges = tuple(ranges.get(pkg, ()))
        if not pkg_ranges and not versions.get(pkg):
            ledger.record(WarningStage.ADVISORY, doc_id, f"no usable ranges for {pkg}")
            continue
        fixed = sorted({r.fixed for r in pkg_ranges if r.fixed is not None})
        advisories.append(
            Advisory(
                id=doc_id,
                pkg=pkg,
                affected_ranges=pkg_ranges,
                affected_versions=frozenset(versions.get(pkg, ())),
                fixed_versions=tuple(fixed),
                published_at=published_at,
            )
        )
    return advisories


def load_osv(
    documents: Iterable[dict[str, Any]],
    ledger: WarningLedger | None = None,
    ecosystems: set[Ecosystem] | None = None,
) -> AdvisoryStore:
    """
    Build an AdvisoryStore from OSV JSON documents.

    Malformed and withdrawn documents are skipped with a warning; loading never
    aborts on a single document.

    Args:
        documents: Parsed OSV documents
        ledger: Warning ledger (a private one is used when omitted)
        ecosystems: Keep only advisories of these ecosystems
    """
    ledger = ledger or WarningLedger()
    advisories: list[Advisory] = []
    for doc in documents:
        doc_id = str(doc.get("id") or "<no id>")
        if doc.get("withdrawn"):
            ledger.record(WarningStage.ADVISORY, doc_id, "withdrawn advisory skipped")
            continue
        try:
            parsed = parse_osv_document(doc, ledger)
        except MalformedDocumentError as e:
            ledger.record(WarningStage.ADVISORY, e.doc_id, e.reason)
            continue
        for advisory in parsed:
            if ecosystems is not None and advisory.pkg.ecosystem not in ecosystems:
                ledger.record(
                    WarningStage.ADVISORY,
                    doc_id,
                    f"ecosystem {advisory.pkg.ecosystem.value} outside the dataset",
                )
                continue
            advisories.append(advisory)
    store = AdvisoryStore(advisories)
    logger.info(f"Loaded {len(store)} advisories for {len(store.packages())} packages")
    return store


async def _read_documents(path: Path, semaphore: asyncio.Semaphore) -> tuple[Path, Any]:
    async with semaphore:
        async with aiofiles.open(path, "r", encoding="utf-8") as f:
            return path, parse_json_output(await f.read())


async def load_osv_dir(
    directory: Path,
    ledger: WarningLedger | None = None,
    ecosystems: set[Ecosystem] | None = None,
    concurrency: int = 32,
) -> AdvisoryStore:
    """
    Read every `*.json` file under a directory and load it as OSV.

    Files are read concurrently; documents are then loaded in sorted path order so
    the resulting store does not depend on read scheduling. A file may hold one
    document or a list of documents.
    """
    ledger = ledger or WarningLedger()
    paths = sorted(Path(directory).rglob("*.json"))
    semaphore = asyncio.Semaphore(concurrency)
    results = await asyncio.gather(*(_read_documents(p, semaphore) for p in paths))

    documents: list[dict[str, Any]] = []
    for path, data in sorted(results, key=lambda item: item[0]):
        if isinstance(data, dict):
            documents.append(data)
        elif isinstance(data, list):
            documents.extend(d for d in data if isinstance(d, dict))
        else:
            ledger.record(WarningStage.ADVISORY, path.name, "not a JSON object")
    logger.debug(f"Read {len(documents)} OSV documents from {len(paths)} files")
    return load_osv(documents, ledger, ecosystems)


def is_affected(advisory: Advisory, version: SemVersion) -> bool:
    """True iff the version lies in an affected range or the explicit version list."""
    if version in advisory.fixed_versions:
        return False
    if version in advisory.affected_versions:
        return True
    return any(r.contains(version) for r in advisory.affected_ranges)


def fix_available_at(advisory: Advisory, idx: ReleaseIndex, t: datetime) -> bool:
    """True iff some fixed version of the advisory was released at or before t."""
    for fixed in advisory.fixed_versions:
        released = idx.released_at(advisory.pkg, fixed)
        if released is not None and released <= t:
            return True
    return False


def advisory_events_for(
    store: AdvisoryStore, dep: PackageId, idx: ReleaseIndex
) -> list[datetime]:
    """Sorted, deduplicated publication instants and fix-release instants for a dependency."""
    events: set[datetime] = set()
    for advisory in store.for_package(dep):
        events.add(advisory.published_at)
        for fixed in advisory.fixed_versions:
            released = idx.released_at(dep, fixed)
            if released is not None:
                events.add(released)
    return sorted(events)

