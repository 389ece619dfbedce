"""Temporal dependency resolution: split relations into stable, flagged intervals."""

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from typing import Iterable, Optional

from pydantic import BaseModel, ConfigDict, Field

from .advisories import AdvisoryStore, advisory_events_for, fix_available_at, is_affected
from .exceptions import InvariantViolationError, NoDeclarationError
from .models import (
    DependencyEdge,
    DependencyKind,
    IntervalRecord,
    IntervalWarning,
    PackageId,
    PackageRelease,
    WarningRecord,
    WarningStage,
)
from .requirements import RequirementExpr
from .resolver import ReleaseIndex
from .versions import SemVersion

logger = logging.getLogger(__name__)

Pair = tuple[PackageId, PackageId]
# requirement declared by each release of p_i on p_j; None when it did not parse
RequirementHistory = dict[SemVersion, Optional[RequirementExpr]]

_WARNING_STAGES = {
    IntervalWarning.DEPENDENCY_DROPPED: WarningStage.TIMELINE,
    IntervalWarning.IMPORTER_PRERELEASE_ONLY: WarningStage.TIMELINE,
    IntervalWarning.NO_STABLE_RELEASE: WarningStage.TIMELINE,
    IntervalWarning.UNKNOWN_PACKAGE: WarningStage.RESOLVE,
    IntervalWarning.UNRESOLVABLE: WarningStage.RESOLVE,
}


class PairTimeline(BaseModel):
    """Stable intervals of one (package, dependency) relation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pair: tuple[PackageId, PackageId] = Field(..., description="(p_i, p_j)")
    events: tuple[datetime, ...] = Field(..., description="Sorted interval boundaries")
    intervals: tuple[IntervalRecord, ...] = Field(default=(), description="Flagged intervals")


def pair_key(pair: Pair) -> tuple[str, str, str]:
    """Canonical sort key of a pair."""
    return (pair[0].ecosystem.value, pair[0].name, pair[1].name)


def group_requirements(
    edges: Iterable[DependencyEdge],
    unparseable: Iterable[tuple[PackageId, SemVersion, PackageId]] = (),
) -> dict[Pair, RequirementHistory]:
    """
    Group regular dependency edges into per-pair requirement histories.

    Args:
        edges: Parsed dependency edges; dev and optional edges are ignored
        unparseable: (from_pkg, from_version, to_pkg) of regular edges whose requirement
            failed to parse; they stay in the history so the release still declares p_j

    Returns:
        Mapping from pair to {from_version: requirement or None}
    """
    history: dict[Pair, RequirementHistory] = defaultdict(dict)
    for edge in edges:
        if edge.kind is not DependencyKind.REGULAR:
            continue
        history[(edge.from_pkg, edge.to_pkg)][edge.from_version] = edge.requirement
    for from_pkg, from_version, to_pkg in unparseable:
        history[(from_pkg, to_pkg)].setdefault(from_version, None)
    return dict(history)


def build_event_timeline(
    pair: Pair,
    releases_i: Iterable[PackageRelease],
    releases_j: Iterable[PackageRelease],
    requirements: RequirementHistory,
    advisory_events: Iterable[datetime],
    cutoff: datetime,
) -> list[datetime]:
    """
    Interval boundaries of a relation's lifetime.

    The lifetime starts with the first release of p_i declaring p_j and ends at the
    cutoff. Every release of p_i and p_j, every advisory publication and every fix
    release in between is a boundary.

    Raises:
        NoDeclarationError: If no release of p_i up to the cutoff declares p_j
    """
    releases_i = list(releases_i)
    declaring = [
        r.released_at for r in releases_i if r.version in requirements and r.released_at <= cutoff
    ]
    if not declaring:
        raise NoDeclarationError(str(pair[0]), str(pair[1]))
    first = min(declaring)

    events = {first, cutoff}
    for release in (*releases_i, *releases_j):
        if first <= release.released_at <= cutoff:
            events.add(release.released_at)
    for instant in advisory_events:
        if first <= instant <= cutoff:
            events.add(instant)
    return sorted(events)


def flag_out_of_date(resolved: SemVersion | None, highest: SemVersion | None) -> bool:
    """
    Whether the resolved version lags the highest available one.

    An unresolvable requirement (resolved None) counts as out of date; a dependency
    without any stable release (highest None) never does.
    """
    if highest is None:
        return False
    if resolved is None:
        return True
    return resolved != highest


def flag_exposed(record: IntervalRecord, store: AdvisoryStore, index: ReleaseIndex) -> bool:
    """
    Whether the interval's resolved version is outdated and affected by an advisory
    that was published, with a fix released, by the interval start.
    """
    if not record.is_out_of_date or record.resolved is None:
        return False
    for advisory in store.for_package(record.to_pkg):
        if advisory.published_at > record.start:
            continue
        if not is_affected(advisory, record.resolved):
            continue
        if fix_available_at(advisory, index, record.start):
            return True
    return False


def _interval(
    pair: Pair,
    start: datetime,
    end: datetime,
    index: ReleaseIndex,
    store: AdvisoryStore,
    requirements: RequirementHistory,
) -> IntervalRecord:
    from_pkg, to_pkg = pair
    base = {"from_pkg": from_pkg, "to_pkg": to_pkg, "start": start, "end": end}

    if from_pkg not in index or to_pkg not in index:
        return IntervalRecord(**base, warning=IntervalWarning.UNKNOWN_PACKAGE)

    from_version = index.latest_release_at(from_pkg, start)
    if from_version is None:
        return IntervalRecord(**base, warning=IntervalWarning.IMPORTER_PRERELEASE_ONLY)
    base["from_version"] = from_version
    if from_version not in requirements:
        return IntervalRecord(**base, warning=IntervalWarning.DEPENDENCY_DROPPED)
    requirement = requirements[from_version]
    if requirement is None:
        return IntervalRecord(**base, warning=IntervalWarning.REQUIREMENT_UNPARSEABLE)

    resolved = index.resolve_at(requirement, to_pkg, start)
    highest = index.highest_available_at(to_pkg, start)
    warning = None
    if highest is None:
        warning = IntervalWarning.NO_STABLE_RELEASE
    elif resolved is None:
        warning = IntervalWarning.UNRESOLVABLE

    record = IntervalRecord(
        **base,
        requirement=requirement,
        resolved=resolved,
        highest=highest,
        is_out_of_date=flag_out_of_date(resolved, highest),
        warning=warning,
    )
    if flag_exposed(record, store, index):
        record = record.model_copy(update={"is_exposed": True})
    return record


def resolve_intervals(
    pair: Pair,
    timeline: list[datetime],
    index: ReleaseIndex,
    store: AdvisoryStore,
    requirements: RequirementHistory,
) -> list[IntervalRecord]:
    """
    Resolve and flag every interval [T_k, T_k+1) of a timeline.

    The importing release is the highest stable release of p_i at T_k, the resolved
    dependency version is the highest release of p_j at T_k satisfying that release's
    requirement. Resolution problems become interval warnings; a pair never aborts.

    Args:
        pair: (p_i, p_j)
        timeline: Boundaries from build_event_timeline
        index: Release index
        store: Advisory store
        requirements: Requirement history of the pair

    Returns:
        One IntervalRecord per consecutive boundary pair
    """
    return [
        _interval(pair, start, end, index, store, requirements)
        for start, end in zip(timeline, timeline[1:])
    ]


def compute_pair(
    pair: Pair,
    requirements: RequirementHistory,
    index: ReleaseIndex,
    store: AdvisoryStore,
    cutoff: datetime,
) -> PairTimeline:
    """
    Build and resolve the timeline of one pair.

    Raises:
        NoDeclarationError: If no release of p_i up to the cutoff declares p_j
    """
    from_pkg, to_pkg = pair
    releases_i = index.releases(from_pkg) if from_pkg in index else []
    releases_j = index.releases(to_pkg) if to_pkg in index else []
    events = build_event_timeline(
        pair,
        releases_i,
        releases_j,
        requirements,
        advisory_events_for(store, to_pkg, index),
        cutoff,
    )
    intervals = resolve_intervals(pair, events, index, store, requirements)
    return PairTimeline(pair=pair, events=tuple(events), intervals=tuple(intervals))


def _pair_warnings(timeline: PairTimeline) -> list[WarningRecord]:
    subject = f"{timeline.pair[0]} -> {timeline.pair[1]}"
    codes = sorted({r.warning for r in timeline.intervals if r.warning is not None})
    return [
        WarningRecord(stage=_WARNING_STAGES[code], subject=subject, reason=code.value)
        for code in codes
        if code in _WARNING_STAGES
    ]


def _run_job(
    job: tuple[Pair, RequirementHistory],
    index: ReleaseIndex,
    store: AdvisoryStore,
    cutoff: datetime,
) -> tuple[PairTimeline | None, list[WarningRecord]]:
    pair, requirements = job
    try:
        timeline = compute_pair(pair, requirements, index, store, cutoff)
    except NoDeclarationError as e:
        warning = WarningRecord(
            stage=WarningStage.TIMELINE, subject=f"{pair[0]} -> {pair[1]}", reason=e.message
        )
        return None, [warning]
    return timeline, _pair_warnings(timeline)


# worker-process state, set once per process by the pool initializer
_worker_state: dict = {}


def _init_worker(index: ReleaseIndex, store: AdvisoryStore, cutoff: datetime):
    _worker_state.update(index=index, store=store, cutoff=cutoff)


def _run_job_in_worker(
    job: tuple[Pair, RequirementHistory],
) -> tuple[PairTimeline | None, list[WarningRecord]]:
    return _run_job(job, _worker_state["index"], _worker_state["store"], _worker_state["cutoff"])


class TimelineEngine:
    """
    Runs temporal resolution over every pair of a dataset.

    Pairs are independent; with more than one worker they are spread over a
    process pool. Results are sorted by pair and interval start either way, so
    the output does not depend on the worker count.
    """

    def __init__(
        self,
        index: ReleaseIndex,
        store: AdvisoryStore,
        cutoff: datetime,
        workers: int = 1,
        chunk_size: int = 256,
    ):
        """
        Initialize engine.

        Args:
            index: Release index shared by all pairs
            store: Advisory store shared by all pairs
            cutoff: End of every lifetime
            workers: Process count (1 = run in this process)
            chunk_size: Pairs per task sent to a worker
        """
        self.index = index
        self.store = store
        self.cutoff = cutoff
        self.workers = max(1, workers)
        self.chunk_size = chunk_size

    def run(
        self, history: dict[Pair, RequirementHistory]
    ) -> tuple[list[PairTimeline], list[WarningRecord]]:
        """
        Compute timelines for every pair.

        Args:
            history: Requirement history per pair (see group_requirements)

        Returns:
            (timelines sorted by pair, warnings in the same order)
        """
        jobs = sorted(history.items(), key=lambda item: pair_key(item[0]))
        logger.info(f"Resolving {len(jobs)} pairs with {self.workers} worker(s)")

        if self.workers == 1 or len(jobs) < 2:
            results = [_run_job(job, self.index, self.store, self.cutoff) for job in jobs]
        else:
            with ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_init_worker,
                initargs=(self.index, self.store, self.cutoff),
            ) as executor:
                results = list(executor.map(_run_job_in_worker, jobs, chunksize=self.chunk_size))

        timelines: list[PairTimeline] = []
        warnings: list[WarningRecord] = []
        for timeline, pair_warnings in results:
            if timeline is not None:
                timelines.append(timeline)
            warnings.extend(pair_warnings)
        timelines.sort(key=lambda t: pair_key(t.pair))

        n_intervals = sum(len(t.intervals) for t in timelines)
        logger.info(f"Built {n_intervals} intervals for {len(timelines)} pairs")
        return timelines, warnings


def iter_records(timelines: Iterable[PairTimeline]) -> Iterable[IntervalRecord]:
    """All interval records in canonical order (pair, then start)."""
    for timeline in timelines:
        yield from timeline.intervals


def check_timeline(timeline: PairTimeline):
    """
    Verify the partition and flag invariants of a resolved timeline.

    Raises:
        InvariantViolationError: If intervals are not contiguous, do not cover the
            events, or exposure exceeds out-of-date time
    """
    subject = f"{timeline.pair[0]} -> {timeline.pair[1]}"
    intervals = timeline.intervals
    if len(intervals) != max(0, len(timeline.events) - 1):
        raise InvariantViolationError("one interval per boundary pair", subject)
    for record, start, end in zip(intervals, timeline.events, timeline.events[1:]):
        if record.start != start or record.end != end:
            raise InvariantViolationError("contiguous intervals", subject)
    tood = sum(r.duration_days for r in intervals if r.included and r.is_out_of_date)
    pfet = sum(r.duration_days for r in intervals if r.included and r.is_exposed)
    if pfet > tood:
        raise InvariantViolationError("exposure within out-of-date time", subject)
