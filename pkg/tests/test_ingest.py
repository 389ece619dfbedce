"""Tests for dataset ingestion."""

import json

import pytest
from factories import (
    DEPS_HEADER,
    EXPRESS_QS_CUTOFF,
    RELEASE_HEADER,
    osv_doc,
    pkg,
    run_config,
    ts,
    v,
    write_csv,
    write_dataset,
)

from depmetrics.ecosystem import Ecosystem
from depmetrics.exceptions import FormatError, InputIOError
from depmetrics.ingest import ingest, load_advisories, load_deps, load_releases
from depmetrics.ledger import WarningLedger
from depmetrics.models import WarningStage


def test_golden_fixture_counts(express_qs_paths, tmp_path):
    dataset = ingest(run_config(express_qs_paths, tmp_path / "out"))
    assert dataset.counts() == {
        "packages": 2,
        "releases": 7,
        "edges": 5,
        "unparseable_edges": 0,
        "advisories": 1,
    }
    assert len(dataset.ledger) == 0
    assert dataset.latest_timestamp() == ts("2013-05-07T20:00:00Z")
    assert dataset.latest_timestamp() < ts(EXPRESS_QS_CUTOFF)


def test_bad_release_rows_become_warnings(tmp_path):
    path = tmp_path / "releases.csv"
    write_csv(
        path,
        RELEASE_HEADER,
        [
            ("npm", "express", "3.2.1", "2013-04-30T00:00:00Z"),
            ("maven", "org.example:lib", "1.0.0", "2013-04-30T00:00:00Z"),
            ("npm", "express", "3.2", "2013-04-30T00:00:00Z"),
            ("npm", "express", "3.2.1", "2013-05-01T00:00:00Z"),
            ("npm", "express", "3.2.2", ""),
            ("pypi", "Foo_Bar", "1.0", "2013-04-30T00:00:00Z"),
        ],
    )
    ledger = WarningLedger()
    releases, counts = load_releases(path, ledger)
    assert [(str(r.pkg), str(r.version)) for r in releases] == [
        ("npm/express", "3.2.1"),
        ("pypi/foo-bar", "1.0.0"),
    ]
    assert releases[0].released_at == ts("2013-04-30T00:00:00Z")
    assert counts == {"read": 6, "kept": 2, "filtered": 0, "warned": 4}
    assert ledger.counts()[WarningStage.PARSE_VERSION.value] == 4
    assert ledger.rows()[0].subject == "releases.csv:3"


def test_ecosystem_filter_counts_filtered_rows(tmp_path):
    path = tmp_path / "releases.csv"
    write_csv(
        path,
        RELEASE_HEADER,
        [
            ("npm", "express", "3.2.1", "2013-04-30T00:00:00Z"),
            ("cargo", "serde", "1.0.0", "2017-04-20T00:00:00Z"),
        ],
    )
    releases, counts = load_releases(path, WarningLedger(), {Ecosystem.NPM})
    assert len(releases) == 1
    assert counts["filtered"] == 1


def test_dependency_rows(tmp_path):
    path = tmp_path / "deps.csv"
    write_csv(
        path,
        DEPS_HEADER,
        [
            ("npm", "express", "3.2.1", "qs", "0.6.1", "regular"),
            ("npm", "express", "3.2.1", "mocha", "*", "dev"),
            ("npm", "express", "3.2.2", "qs", "latest", "regular"),
            ("npm", "express", "3.2.3", "express", "*", "regular"),
            ("npm", "express", "3.2.1", "qs", "0.6.2", "regular"),
            ("npm", "express", "3.2.4", "qs", "*", "peer"),
            ("npm", "express", "3.2.5", "qs", "*", ""),
        ],
    )
    ledger = WarningLedger()
    edges, unparseable, counts = load_deps(path, ledger)
    assert [(e.to_pkg.name, e.kind.value) for e in edges] == [
        ("qs", "regular"),
        ("mocha", "dev"),
        ("qs", "regular"),
    ]
    assert str(edges[0].requirement) == "0.6.1"
    assert edges[2].from_version == v("3.2.5")
    assert unparseable == [(pkg("express"), v("3.2.2"), pkg("qs"))]
    assert counts == {"read": 7, "kept": 3, "filtered": 0, "warned": 4}


def test_missing_file(tmp_path):
    with pytest.raises(InputIOError):
        load_releases(tmp_path / "absent.csv", WarningLedger())


def test_empty_file_is_a_format_error(tmp_path):
    path = tmp_path / "releases.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(FormatError):
        load_releases(path, WarningLedger())


def test_missing_column_is_a_format_error(tmp_path):
    path = tmp_path / "deps.csv"
    write_csv(path, ["ecosystem", "from_name", "from_version", "to_name"], [])
    with pytest.raises(FormatError):
        load_deps(path, WarningLedger())


def test_header_only_file_is_empty_input(tmp_path):
    path = tmp_path / "releases.csv"
    write_csv(path, RELEASE_HEADER, [])
    releases, counts = load_releases(path, WarningLedger())
    assert releases == []
    assert counts["read"] == 0


def test_advisories_from_single_file(tmp_path):
    path = tmp_path / "osv.json"
    path.write_text(
        json.dumps(
            [
                osv_doc("GHSA-a", "qs", [("0", "6.2.4")], "2022-12-08T00:00:00Z"),
                osv_doc("GHSA-b", "serde", [("1.0.0", "1.0.1")], "2022-12-08", "crates.io"),
            ]
        ),
        encoding="utf-8",
    )
    ledger = WarningLedger()
    store = load_advisories(path, ledger, {Ecosystem.NPM})
    assert len(store) == 1
    assert len(ledger) == 1


def test_advisories_errors(tmp_path):
    broken = tmp_path / "osv.json"
    broken.write_text("[not json", encoding="utf-8")
    with pytest.raises(FormatError):
        load_advisories(broken, WarningLedger())
    with pytest.raises(InputIOError):
        load_advisories(tmp_path / "absent", WarningLedger())
    assert len(load_advisories(None, WarningLedger())) == 0


def test_advisories_outside_dataset_ecosystems_are_skipped(tmp_path):
    paths = write_dataset(
        tmp_path / "data",
        [("npm", "express", "3.2.1", "2013-04-30T00:00:00Z")],
        [],
        [osv_doc("PYSEC-1", "requests", [("0", "2.31.0")], "2023-05-22T00:00:00Z", "PyPI")],
    )
    dataset = ingest(run_config(paths, tmp_path / "out"))
    assert len(dataset.store) == 0
    assert dataset.ledger.counts()[WarningStage.ADVISORY.value] == 1


def test_rows_with_wrong_field_count_become_warnings(tmp_path):
    path = tmp_path / "releases.csv"
    path.write_text(
        "ecosystem,name,version,released_at\n"
        "npm,express,3.2.1,2013-04-30T00:00:00Z\n"
        "npm,express,3.2.2,2013-05-03T00:00:00Z,extra\n"
        "npm,express,3.2.3\n"
        "npm,qs,0.6.1,2013-04-22T00:00:00Z,,\n",
        encoding="utf-8",
    )
    ledger = WarningLedger()
    releases, counts = load_releases(path, ledger)
    assert [str(r.version) for r in releases] == ["3.2.1"]
    assert counts == {"read": 4, "kept": 1, "filtered": 0, "warned": 3}
    rows = ledger.rows()
    assert [row.subject for row in rows] == ["releases.csv:3", "releases.csv:4", "releases.csv:5"]
    assert rows[0].reason == "1 field(s) beyond the 4-column header"
    assert rows[1].reason == "fewer fields than the 4-column header"
    assert rows[2].reason == "2 field(s) beyond the 4-column header"


def test_dependency_row_with_extra_field_is_not_an_edge(tmp_path):
    path = tmp_path / "deps.csv"
    path.write_text(
        "ecosystem,from_name,from_version,to_name,requirement,kind\n"
        "npm,express,3.2.1,qs,0.6.1,regular,surprise\n",
        encoding="utf-8",
    )
    ledger = WarningLedger()
    edges, unparseable, counts = load_deps(path, ledger)
    assert edges == [] and unparseable == []
    assert counts["warned"] == 1
    assert ledger.counts()[WarningStage.PARSE_VERSION.value] == 1
