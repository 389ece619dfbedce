"""Tests for temporal resolution of package/dependency relations."""

import random
from datetime import timedelta

import pytest
from factories import (
    EXPRESS_QS_ADVISORY,
    EXPRESS_QS_CUTOFF,
    EXPRESS_QS_DEPS,
    EXPRESS_QS_ROWS,
    WALKTHROUGH_CUTOFF,
    WALKTHROUGH_DEPS,
    WALKTHROUGH_PHASES,
    edge,
    osv_doc,
    pkg,
    rel,
    req,
    ts,
    v,
)

from depmetrics.advisories import AdvisoryStore, advisory_events_for, parse_osv_document
from depmetrics.exceptions import InvariantViolationError, NoDeclarationError
from depmetrics.metrics import summarize_pair
from depmetrics.models import DependencyKind, IntervalRecord, IntervalWarning, PackageRelease
from depmetrics.resolver import ReleaseIndex
from depmetrics.timeline import (
    PairTimeline,
    TimelineEngine,
    build_event_timeline,
    check_timeline,
    compute_pair,
    flag_exposed,
    flag_out_of_date,
    group_requirements,
    iter_records,
)
from depmetrics.utils import format_timestamp
from depmetrics.versions import SemVersion

EXPRESS_QS = (pkg("express"), pkg("qs"))
APP_LIB = (pkg("app"), pkg("lib"))
EMPTY_STORE = AdvisoryStore()


def history_of(rows) -> dict:
    return {
        v(from_version): req(requirement)
        for _, _, from_version, _, requirement, kind in rows
        if kind == "regular"
    }


def test_express_qs_intervals(express_qs_index):
    store = AdvisoryStore(parse_osv_document(EXPRESS_QS_ADVISORY))
    timeline = compute_pair(
        EXPRESS_QS, history_of(EXPRESS_QS_DEPS), express_qs_index, store, ts(EXPRESS_QS_CUTOFF)
    )
    rows = [
        (
            str(r.from_version),
            r.requirement.source_text,
            str(r.resolved),
            str(r.highest),
            format_timestamp(r.start),
            format_timestamp(r.end),
            r.is_out_of_date,
        )
        for r in timeline.intervals
    ]
    assert rows == EXPRESS_QS_ROWS
    assert not any(r.is_exposed for r in timeline.intervals)
    assert all(r.warning is None for r in timeline.intervals)
    check_timeline(timeline)


def test_simultaneous_releases_share_one_boundary(express_qs_index):
    events = build_event_timeline(
        EXPRESS_QS,
        express_qs_index.releases(pkg("express")),
        express_qs_index.releases(pkg("qs")),
        history_of(EXPRESS_QS_DEPS),
        [],
        ts(EXPRESS_QS_CUTOFF),
    )
    assert events.count(ts("2013-05-03T00:00:00Z")) == 1
    assert len(events) == 6


def test_single_release_gives_one_interval():
    index = ReleaseIndex(
        [rel("lib", "1.0.0", "2020-01-01T00:00:00Z"), rel("app", "1.0.0", "2020-02-01T00:00:00Z")]
    )
    timeline = compute_pair(
        APP_LIB, {v("1.0.0"): req("^1.0.0")}, index, EMPTY_STORE, ts("2020-03-01T00:00:00Z")
    )
    assert timeline.events == (ts("2020-02-01T00:00:00Z"), ts("2020-03-01T00:00:00Z"))
    (record,) = timeline.intervals
    assert record.resolved == record.highest == v("1.0.0")
    assert not record.is_out_of_date


def test_lifetime_starting_at_cutoff_has_no_intervals(walkthrough_index, walkthrough_store):
    timeline = compute_pair(
        APP_LIB,
        history_of(WALKTHROUGH_DEPS),
        walkthrough_index,
        walkthrough_store,
        ts("2020-01-10T00:00:00Z"),
    )
    assert timeline.intervals == ()
    check_timeline(timeline)


def test_no_declaration():
    index = ReleaseIndex([rel("app", "1.0.0", "2020-01-01T00:00:00Z")])
    with pytest.raises(NoDeclarationError):
        build_event_timeline(
            APP_LIB, index.releases(pkg("app")), [], {}, [], ts("2021-01-01T00:00:00Z")
        )


def test_declaration_after_cutoff_is_ignored():
    index = ReleaseIndex([rel("app", "1.0.0", "2022-01-01T00:00:00Z")])
    with pytest.raises(NoDeclarationError):
        build_event_timeline(
            APP_LIB,
            index.releases(pkg("app")),
            [],
            {v("1.0.0"): req("*")},
            [],
            ts("2021-01-01T00:00:00Z"),
        )


def test_walkthrough_flags(walkthrough_index, walkthrough_store):
    timeline = compute_pair(
        APP_LIB,
        history_of(WALKTHROUGH_DEPS),
        walkthrough_index,
        walkthrough_store,
        ts(WALKTHROUGH_CUTOFF),
    )
    phases = [(r.is_out_of_date, r.is_exposed, r.duration_days) for r in timeline.intervals]
    assert phases == WALKTHROUGH_PHASES
    exposed = next(r for r in timeline.intervals if r.is_exposed)
    assert exposed.resolved == v("2.0.0")
    assert exposed.highest == v("2.0.1")
    check_timeline(timeline)


@pytest.mark.parametrize(
    "resolved,highest,expected",
    [
        ("0.6.3", "0.6.3", False),
        ("0.6.3", "0.6.4", True),
        (None, "1.0.0", True),
        ("1.0.0", None, False),
        (None, None, False),
    ],
)
def test_flag_out_of_date(resolved, highest, expected):
    def maybe(text):
        return v(text) if text else None

    assert flag_out_of_date(maybe(resolved), maybe(highest)) is expected


def interval(resolved, start, out_of_date=True):
    return IntervalRecord(
        from_pkg=pkg("app"),
        from_version=v("0.0.3"),
        to_pkg=pkg("lib"),
        requirement=req("=2.0.0"),
        resolved=v(resolved),
        highest=v("2.0.1"),
        start=ts(start),
        end=ts(start) + timedelta(days=1),
        is_out_of_date=out_of_date,
    )


def test_exposed_after_publication(walkthrough_store, walkthrough_index):
    record = interval("2.0.0", "2020-02-20T00:00:00Z")
    assert flag_exposed(record, walkthrough_store, walkthrough_index)


def test_not_exposed_before_publication(walkthrough_store, walkthrough_index):
    record = interval("2.0.0", "2020-02-10T00:00:00Z")
    assert not flag_exposed(record, walkthrough_store, walkthrough_index)


def test_not_exposed_outside_affected_range(walkthrough_store, walkthrough_index):
    record = interval("1.0.6", "2020-02-25T00:00:00Z")
    assert not flag_exposed(record, walkthrough_store, walkthrough_index)


def test_not_exposed_when_up_to_date(walkthrough_store, walkthrough_index):
    record = interval("2.0.0", "2020-02-25T00:00:00Z", out_of_date=False)
    assert not flag_exposed(record, walkthrough_store, walkthrough_index)


def test_dropped_dependency_interval():
    index = ReleaseIndex(
        [
            rel("lib", "1.0.0", "2020-01-01T00:00:00Z"),
            rel("app", "1.0.0", "2020-01-10T00:00:00Z"),
            rel("app", "1.1.0", "2020-01-20T00:00:00Z"),
        ]
    )
    timeline = compute_pair(
        APP_LIB, {v("1.0.0"): req("^1.0.0")}, index, EMPTY_STORE, ts("2020-01-30T00:00:00Z")
    )
    first, second = timeline.intervals
    assert first.warning is None and first.included
    assert second.warning is IntervalWarning.DEPENDENCY_DROPPED
    assert second.from_version == v("1.1.0")
    assert not second.included


def test_unparseable_requirement_interval():
    index = ReleaseIndex(
        [rel("lib", "1.0.0", "2020-01-01T00:00:00Z"), rel("app", "1.0.0", "2020-01-10T00:00:00Z")]
    )
    timeline = compute_pair(APP_LIB, {v("1.0.0"): None}, index, EMPTY_STORE, ts("2020-02-01"))
    (record,) = timeline.intervals
    assert record.warning is IntervalWarning.REQUIREMENT_UNPARSEABLE
    assert not record.included


def test_unknown_dependency_interval():
    index = ReleaseIndex([rel("app", "1.0.0", "2020-01-10T00:00:00Z")])
    timeline = compute_pair(
        APP_LIB, {v("1.0.0"): req("^1.0.0")}, index, EMPTY_STORE, ts("2020-02-01")
    )
    (record,) = timeline.intervals
    assert record.warning is IntervalWarning.UNKNOWN_PACKAGE
    assert not record.included


def test_unresolvable_interval_counts_as_out_of_date():
    index = ReleaseIndex(
        [rel("lib", "1.0.0", "2020-01-01T00:00:00Z"), rel("app", "1.0.0", "2020-01-10T00:00:00Z")]
    )
    timeline = compute_pair(
        APP_LIB, {v("1.0.0"): req(">=9.0.0")}, index, EMPTY_STORE, ts("2020-02-01")
    )
    (record,) = timeline.intervals
    assert record.warning is IntervalWarning.UNRESOLVABLE
    assert record.resolved is None
    assert record.is_out_of_date
    assert record.included


def test_prerelease_only_dependency_interval():
    index = ReleaseIndex(
        [
            rel("lib", "1.0.0-beta", "2020-01-01T00:00:00Z"),
            rel("app", "1.0.0", "2020-01-10T00:00:00Z"),
        ]
    )
    timeline = compute_pair(
        APP_LIB, {v("1.0.0"): req("^1.0.0-beta")}, index, EMPTY_STORE, ts("2020-02-01")
    )
    (record,) = timeline.intervals
    assert record.warning is IntervalWarning.NO_STABLE_RELEASE
    assert record.highest is None
    assert not record.is_out_of_date
    assert record.included


def test_prerelease_only_importer_interval_is_excluded():
    index = ReleaseIndex(
        [
            rel("lib", "1.0.0", "2020-01-01T00:00:00Z"),
            rel("app", "1.0.0-rc.1", "2020-01-10T00:00:00Z"),
            rel("app", "1.0.0", "2020-01-20T00:00:00Z"),
        ]
    )
    history = {v("1.0.0-rc.1"): req("^1.0.0"), v("1.0.0"): req("^1.0.0")}
    timeline = compute_pair(APP_LIB, history, index, EMPTY_STORE, ts("2020-02-01"))
    first, second = timeline.intervals
    assert first.warning is IntervalWarning.IMPORTER_PRERELEASE_ONLY
    assert not first.included
    assert second.warning is None and second.included


def test_group_requirements_keeps_regular_edges_only():
    edges = [
        edge("app", "1.0.0", "lib", "^1.0.0"),
        edge("app", "1.0.0", "jest", "^29.0.0", kind=DependencyKind.DEV),
    ]
    history = group_requirements(edges, [(pkg("app"), v("1.1.0"), pkg("lib"))])
    assert list(history) == [APP_LIB]
    assert history[APP_LIB] == {v("1.0.0"): req("^1.0.0"), v("1.1.0"): None}


def test_check_timeline_rejects_gaps(walkthrough_index, walkthrough_store):
    timeline = compute_pair(
        APP_LIB,
        history_of(WALKTHROUGH_DEPS),
        walkthrough_index,
        walkthrough_store,
        ts(WALKTHROUGH_CUTOFF),
    )
    broken = PairTimeline(
        pair=timeline.pair, events=timeline.events, intervals=timeline.intervals[:-1]
    )
    with pytest.raises(InvariantViolationError):
        check_timeline(broken)


def test_engine_reports_missing_declarations(walkthrough_index, walkthrough_store):
    history = {
        APP_LIB: history_of(WALKTHROUGH_DEPS),
        (pkg("app"), pkg("zlib")): {v("9.9.9"): req("*")},
    }
    engine = TimelineEngine(walkthrough_index, walkthrough_store, ts(WALKTHROUGH_CUTOFF))
    timelines, warnings = engine.run(history)
    assert [t.pair for t in timelines] == [APP_LIB]
    assert len(warnings) == 1
    assert "zlib" in warnings[0].subject


def random_pair(rng: random.Random, start) -> tuple[ReleaseIndex, dict]:
    grid = [SemVersion(a, b, c) for a in range(3) for b in range(3) for c in range(3)]

    def releases(name, count):
        return [
            PackageRelease(
                pkg=pkg(name),
                version=version,
                released_at=start + timedelta(seconds=rng.randrange(0, 200 * 86400)),
            )
            for version in rng.sample(grid, count)
        ]

    importer = releases("app", rng.randint(1, 6))
    dependency = releases("lib", rng.randint(1, 8))
    choices = ["^0.1.0", "^1.0.0", "~2.1.0", "*", ">=1.1.0", "0.2.2", ">=0.0.0 <1.2.0"]
    requirements = {r.version: req(rng.choice(choices)) for r in importer if rng.random() < 0.8}
    if not requirements:
        requirements[importer[0].version] = req("*")
    return ReleaseIndex(importer + dependency), requirements


def random_store(rng: random.Random, start) -> AdvisoryStore:
    grid = [f"{a}.{b}.{c}" for a in range(3) for b in range(3) for c in range(3)]
    advisories = []
    for k in range(rng.randint(0, 3)):
        low, high = sorted(rng.sample(range(len(grid)), 2))
        introduced = "0" if rng.random() < 0.3 else grid[low]
        published = format_timestamp(start + timedelta(seconds=rng.randrange(0, 220 * 86400)))
        doc = osv_doc(f"GHSA-rand-{k}", "lib", [(introduced, grid[high])], published)
        advisories.extend(parse_osv_document(doc))
    return AdvisoryStore(advisories)


def check_against_daily_oracle(rng: random.Random):
    start = ts("2021-01-01T00:00:00Z")
    cutoff = start + timedelta(days=220)
    index, requirements = random_pair(rng, start)
    store = random_store(rng, start)
    timeline = compute_pair(APP_LIB, requirements, index, store, cutoff)
    check_timeline(timeline)

    records = timeline.intervals
    assert records[0].start == timeline.events[0]
    assert records[-1].end == cutoff
    for earlier, later in zip(records, records[1:]):
        assert earlier.end == later.start

    day = timeline.events[0]
    while day < cutoff:
        record = next(r for r in records if r.start <= day < r.end)
        from_version = index.latest_release_at(pkg("app"), day)
        assert record.from_version == from_version
        requirement = requirements.get(from_version)
        if requirement is not None:
            assert record.resolved == index.resolve_at(requirement, pkg("lib"), day)
            assert record.highest == index.highest_available_at(pkg("lib"), day)
            moved = record.model_copy(update={"start": day})
            assert record.is_exposed == flag_exposed(moved, store, index)
        else:
            assert record.warning is IntervalWarning.DEPENDENCY_DROPPED
        day += timedelta(days=1)


def check_interval_properties(rng: random.Random):
    start = ts("2021-01-01T00:00:00Z")
    cutoff = start + timedelta(days=220)
    index, requirements = random_pair(rng, start)
    store = random_store(rng, start)
    timeline = compute_pair(APP_LIB, requirements, index, store, cutoff)
    check_timeline(timeline)

    records = timeline.intervals
    assert records[0].start == timeline.events[0]
    assert records[-1].end == cutoff
    for earlier, later in zip(records, records[1:]):
        assert earlier.end == later.start

    instants = [r.released_at for p in APP_LIB for r in index.releases(p)]
    instants.extend(advisory_events_for(store, pkg("lib"), index))
    for record in records:
        assert not any(record.start < t < record.end for t in instants)
        assert record.is_out_of_date or not record.is_exposed

        midpoint = record.start + (record.end - record.start) / 2
        assert index.latest_release_at(pkg("app"), midpoint) == record.from_version
        requirement = requirements.get(record.from_version)
        if requirement is None:
            assert record.warning is IntervalWarning.DEPENDENCY_DROPPED
            continue
        assert index.resolve_at(requirement, pkg("lib"), midpoint) == record.resolved
        assert index.highest_available_at(pkg("lib"), midpoint) == record.highest
        moved = record.model_copy(update={"start": midpoint})
        assert flag_exposed(moved, store, index) == record.is_exposed

    included = [r for r in records if r.included]
    pfet = sum(r.duration_days for r in included if r.is_exposed)
    tood = sum(r.duration_days for r in included if r.is_out_of_date)
    total = sum(r.duration_days for r in included)
    assert pfet <= tood <= total
    if included:
        summary = summarize_pair(records)
        assert summary.total_days == pytest.approx(total)


def test_interval_properties():
    rng = random.Random(8)
    for _ in range(300):
        check_interval_properties(rng)


@pytest.mark.slow
def test_interval_properties_at_scale():
    rng = random.Random(4321)
    for _ in range(10_000):
        check_interval_properties(rng)


def test_intervals_agree_with_daily_resolution():
    rng = random.Random(5)
    for _ in range(50):
        check_against_daily_oracle(rng)


@pytest.mark.slow
def test_intervals_agree_with_daily_resolution_at_scale():
    rng = random.Random(1234)
    for _ in range(1000):
        check_against_daily_oracle(rng)


def test_engine_output_independent_of_worker_count(walkthrough_index, walkthrough_store):
    history = {
        APP_LIB: history_of(WALKTHROUGH_DEPS),
        (pkg("app"), pkg("left-pad")): {v("0.0.1"): req("*")},
        (pkg("lib"), pkg("app")): {v("2.0.0"): req("*"), v("2.0.1"): req("^0.0.1")},
    }
    cutoff = ts(WALKTHROUGH_CUTOFF)
    serial, serial_warnings = TimelineEngine(walkthrough_index, walkthrough_store, cutoff).run(
        history
    )
    parallel, parallel_warnings = TimelineEngine(
        walkthrough_index, walkthrough_store, cutoff, workers=2, chunk_size=1
    ).run(history)
    assert list(iter_records(serial)) == list(iter_records(parallel))
    assert serial_warnings == parallel_warnings
