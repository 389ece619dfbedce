"""Per-pair and per-package TOOD/PFET aggregation, package filter and TTU baseline."""

import logging
from collections import defaultdict
from datetime import datetime
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field

from .exceptions import EmptyInputError, MixedPairError, UnknownPackageError, UnresolvableError
from .ledger import WarningLedger
from .models import (
    DependencyEdge,
    DependencyKind,
    IntervalRecord,
    PackageId,
    PackageMetrics,
    PairSummary,
    WarningStage,
)
from .resolver import ReleaseIndex
from .utils import days_between, format_timestamp
from .versions import SemVersion

logger = logging.getLogger(__name__)


class ReleaseStats(BaseModel):
    """Release count and age of one package."""

    model_config = ConfigDict(frozen=True)

    count: int = Field(..., ge=0, description="Number of releases")
    age_days: float = Field(..., ge=0, description="Last release minus first release, in days")


class TtuRow(BaseModel):
    """One row of the naive time-to-update table."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    from_pkg: PackageId
    from_version: SemVersion
    from_released_at: datetime
    to_pkg: PackageId
    requirement: str
    resolved: SemVersion
    resolved_released_at: datetime
    ttu_days: float = Field(..., description="Importing release minus resolved release, signed")


def _ratio(part: float, whole: float) -> float:
    if whole <= 0:
        return 0.0
    return min(1.0, part / whole)


def summarize_pair(records: Iterable[IntervalRecord]) -> PairSummary:
    """
    Sum interval durations of one pair.

    Records excluded from aggregation (dropped dependency, unknown package, ...) add
    nothing; zero-length intervals add nothing either.

    Raises:
        EmptyInputError: If no records are given
        MixedPairError: If the records belong to more than one pair
    """
    records = list(records)
    if not records:
        raise EmptyInputError("summarize_pair")
    pairs = {r.pair for r in records}
    if len(pairs) > 1:
        raise MixedPairError(sorted(f"{a} -> {b}" for a, b in pairs))

    tood = pfet = total = 0.0
    for record in records:
        if not record.included:
            continue
        duration = record.duration_days
        total += duration
        if record.is_out_of_date:
            tood += duration
        if record.is_exposed:
            pfet += duration
    from_pkg, to_pkg = records[0].pair
    return PairSummary(
        from_pkg=from_pkg, to_pkg=to_pkg, tood_days=tood, pfet_days=pfet, total_days=total
    )


def _check_package(summaries: list[PairSummary], operation: str):
    if not summaries:
        raise EmptyInputError(operation)
    packages = {s.from_pkg for s in summaries}
    if len(packages) > 1:
        raise MixedPairError(sorted(str(p) for p in packages))


def package_tood(summaries: Iterable[PairSummary]) -> tuple[float, float]:
    """
    TOOD of a package: summed out-of-date days averaged over its dependencies, and
    the share of the summed lifetime spent out of date.

    Raises:
        EmptyInputError: If no summaries are given
    """
    summaries = list(summaries)
    _check_package(summaries, "package_tood")
    tood = sum(s.tood_days for s in summaries)
    total = sum(s.total_days for s in summaries)
    return tood / len(summaries), _ratio(tood, total)


def package_pfet(summaries: Iterable[PairSummary]) -> Optional[tuple[float, float]]:
    """
    PFET of a package, shaped like package_tood; None if it was never exposed.

    Raises:
        EmptyInputError: If no summaries are given
    """
    summaries = list(summaries)
    _check_package(summaries, "package_pfet")
    pfet = sum(s.pfet_days for s in summaries)
    if pfet <= 0:
        return None
    total = sum(s.total_days for s in summaries)
    return pfet / len(summaries), _ratio(pfet, total)


def clip_records(
    records: Iterable[IntervalRecord],
    window_start: Optional[datetime] = None,
    window_end: Optional[datetime] = None,
) -> list[IntervalRecord]:
    """
    Restrict intervals to a time window before aggregation.

    Intervals are cut at the window bounds; those wholly outside are dropped.
    A missing bound leaves that side open.
    """
    if window_start is None and window_end is None:
        return list(records)
    clipped = []
    for record in records:
        start = record.start if window_start is None else max(record.start, window_start)
        end = record.end if window_end is None else min(record.end, window_end)
        if start < end:
            clipped.append(record.model_copy(update={"start": start, "end": end}))
        elif record.start == record.end == start and (window_end is None or start < window_end):
            clipped.append(record)
    return clipped


def aggregate_packages(
    records: Iterable[IntervalRecord],
) -> tuple[list[PairSummary], list[PackageMetrics]]:
    """
    Group interval records into pair summaries and package metrics.

    Pairs without any aggregated interval do not count as dependencies.

    Args:
        records: Interval records of any number of pairs

    Returns:
        (pair summaries sorted by pair, package metrics sorted by package)
    """
    by_pair: dict[tuple[PackageId, PackageId], list[IntervalRecord]] = defaultdict(list)
    for record in records:
        by_pair[record.pair].append(record)

    by_package: dict[PackageId, list[PairSummary]] = defaultdict(list)
    summaries = []
    for pair in sorted(by_pair, key=lambda p: (p[0].ecosystem.value, p[0].name, p[1].name)):
        pair_records = by_pair[pair]
        if not any(r.included for r in pair_records):
            continue
        summary = summarize_pair(pair_records)
        summaries.append(summary)
        by_package[summary.from_pkg].append(summary)

    metrics = []
    for pkg, pkg_summaries in by_package.items():
        n_deps = len(pkg_summaries)
        tood_days, tood_ratio = package_tood(pkg_summaries)
        pfet = package_pfet(pkg_summaries)
        metrics.append(
            PackageMetrics(
                pkg=pkg,
                n_deps=n_deps,
                total_days=sum(s.total_days for s in pkg_summaries),
                tood_days=tood_days,
                tood_ratio=tood_ratio,
                tood_ratio_eq2=tood_ratio / n_deps,
                pfet_days=pfet[0] if pfet else None,
                pfet_ratio=pfet[1] if pfet else None,
                pfet_ratio_eq4=pfet[1] / n_deps if pfet else None,
            )
        )
    logger.debug(f"Aggregated {len(summaries)} pairs into {len(metrics)} packages")
    return summaries, metrics


def release_stats(index: ReleaseIndex) -> dict[PackageId, ReleaseStats]:
    """Release count and age (last minus first release) of every indexed package."""
    stats = {}
    for pkg in index.packages():
        releases = index.releases(pkg)
        stats[pkg] = ReleaseStats(
            count=len(releases),
            age_days=days_between(releases[0].released_at, releases[-1].released_at),
        )
    return stats


def filter_packages(
    metrics: Iterable[PackageMetrics],
    release_counts: dict[PackageId, int],
    ages: dict[PackageId, float],
    min_versions: int = 5,
    min_age_days: float = 30,
) -> list[PackageMetrics]:
    """
    Keep packages with enough releases, a minimum age and at least one dependency.

    The filter applies to the importing packages only, never to their dependencies.

    Args:
        metrics: Package metrics
        release_counts: Releases per package
        ages: Age in days per package
        min_versions: Minimum number of releases (inclusive)
        min_age_days: Minimum age in days (inclusive)
    """
    kept = [
        m
        for m in metrics
        if release_counts.get(m.pkg, 0) >= min_versions
        and ages.get(m.pkg, 0.0) >= min_age_days
        and m.n_deps >= 1
    ]
    logger.info(f"Package filter kept {len(kept)} packages")
    return kept


def compute_ttu(edge: DependencyEdge, index: ReleaseIndex, at: datetime) -> float:
    """
    Naive time-to-update of an edge: release time of the importing version minus
    release time of the version its requirement resolves to at `at`, in days.

    Negative values are expected under open requirements.

    Raises:
        UnknownPackageError: If the importing version has no release record
        UnresolvableError: If the requirement matches nothing released by `at`
    """
    return _ttu_row(edge, index, at).ttu_days


def _ttu_row(edge: DependencyEdge, index: ReleaseIndex, at: datetime) -> TtuRow:
    from_released = index.released_at(edge.from_pkg, edge.from_version)
    if from_released is None:
        raise UnknownPackageError(f"{edge.from_pkg}@{edge.from_version}")
    resolved = index.resolve_at(edge.requirement, edge.to_pkg, at)
    if resolved is None:
        raise UnresolvableError(
            str(edge.to_pkg), edge.requirement.source_text, format_timestamp(at)
        )
    resolved_released = index.released_at(edge.to_pkg, resolved)
    return TtuRow(
        from_pkg=edge.from_pkg,
        from_version=edge.from_version,
        from_released_at=from_released,
        to_pkg=edge.to_pkg,
        requirement=edge.requirement.source_text,
        resolved=resolved,
        resolved_released_at=resolved_released,
        ttu_days=days_between(resolved_released, from_released),
    )


def ttu_table(
    edges: Iterable[DependencyEdge],
    index: ReleaseIndex,
    at: datetime,
    ledger: WarningLedger | None = None,
) -> list[TtuRow]:
    """
    TTU of every regular edge, sorted by (package, version, dependency).

    Edges that cannot be resolved are skipped and recorded in the ledger.
    """
    ledger = ledger or WarningLedger()
    rows = []
    for edge in edges:
        if edge.kind is not DependencyKind.REGULAR:
            continue
        try:
            rows.append(_ttu_row(edge, index, at))
        except (UnknownPackageError, UnresolvableError) as e:
            ledger.record(WarningStage.RESOLVE, f"{edge.from_pkg}@{edge.from_version}", e.message)
    rows.sort(
        key=lambda r: (r.from_pkg.ecosystem.value, r.from_pkg.name, r.from_version, r.to_pkg.name)
    )
    return rows
