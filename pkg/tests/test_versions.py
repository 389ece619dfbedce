"""Tests for version parsing and ordering."""

import itertools
import random

import pytest

from depmetrics.ecosystem import Ecosystem
from depmetrics.exceptions import ParseError
from depmetrics.versions import (
    Ordering,
    SemVersion,
    compare_versions,
    parse_version,
    render_version,
)


def test_parse_npm_release():
    version = parse_version(Ecosystem.NPM, "3.2.1")
    assert version.core == (3, 2, 1)
    assert version.prerelease == ()


def test_prerelease_precedes_release():
    pre = parse_version(Ecosystem.NPM, "1.0.0-alpha.1")
    assert pre.prerelease == ("alpha", 1)
    assert pre < parse_version(Ecosystem.NPM, "1.0.0")


def test_semver_prerelease_precedence_chain():
    chain = [
        "1.0.0-alpha",
        "1.0.0-alpha.1",
        "1.0.0-alpha.beta",
        "1.0.0-beta",
        "1.0.0-beta.2",
        "1.0.0-beta.11",
        "1.0.0-rc.1",
        "1.0.0",
    ]
    versions = [parse_version(Ecosystem.NPM, text) for text in chain]
    assert versions == sorted(versions)
    assert all(a < b for a, b in zip(versions, versions[1:]))


def test_build_metadata_ignored_for_ordering():
    a = parse_version(Ecosystem.CARGO, "1.2.3+build.5")
    b = parse_version(Ecosystem.CARGO, "1.2.3")
    assert a == b
    assert hash(a) == hash(b)


@pytest.mark.parametrize(
    "text",
    ["2!1.0", "1.0.post1", "1.0.dev0", "1.0+local", "1", "1.2.3.4"],
)
def test_pypi_outside_subset_rejected(text):
    with pytest.raises(ParseError):
        parse_version(Ecosystem.PYPI, text)


def test_pypi_two_components_padded():
    assert parse_version(Ecosystem.PYPI, "2.31").core == (2, 31, 0)


def test_pypi_prerelease_ordering():
    a1 = parse_version(Ecosystem.PYPI, "1.0.0a1")
    rc1 = parse_version(Ecosystem.PYPI, "1.0.0rc1")
    final = parse_version(Ecosystem.PYPI, "1.0.0")
    assert a1 < rc1 < final


@pytest.mark.parametrize("text", ["1.2", "01.2.3", "1.2.3-", "", "latest"])
def test_npm_non_semver_rejected(text):
    with pytest.raises(ParseError):
        parse_version(Ecosystem.NPM, text)


def test_leading_v_only_for_npm():
    assert parse_version(Ecosystem.NPM, "v1.2.3").core == (1, 2, 3)
    with pytest.raises(ParseError):
        parse_version(Ecosystem.CARGO, "v1.2.3")


def test_compare_versions_examples():
    npm = Ecosystem.NPM
    assert compare_versions(parse_version(npm, "0.6.1"), parse_version(npm, "0.6.2")) is (
        Ordering.LESS
    )
    assert compare_versions(parse_version(npm, "1.0.0-alpha"), parse_version(npm, "1.0.0")) is (
        Ordering.LESS
    )
    assert compare_versions(parse_version(npm, "2.0.0"), parse_version(npm, "2.0.0")) is (
        Ordering.EQUAL
    )


def _grid() -> list[SemVersion]:
    versions = []
    for major, minor, patch in itertools.product(range(4), repeat=3):
        versions.append(SemVersion(major, minor, patch))
        for tag in ("alpha", "beta"):
            versions.append(SemVersion(major, minor, patch, prerelease=(tag,)))
    return versions


def test_compare_is_total_order_on_grid():
    grid = _grid()
    flip = {Ordering.LESS: Ordering.GREATER, Ordering.GREATER: Ordering.LESS}
    for a in grid:
        for b in grid:
            ab = compare_versions(a, b)
            ba = compare_versions(b, a)
            assert ab is flip.get(ba, ba)
            assert (ab is Ordering.EQUAL) == (a is b or a == b)


def test_compare_is_transitive_on_sorted_random_samples():
    grid = _grid()
    rng = random.Random(7)
    for _ in range(500):
        a, b, c = sorted(rng.sample(grid, 3))
        assert compare_versions(a, b) is Ordering.LESS
        assert compare_versions(b, c) is Ordering.LESS
        assert compare_versions(a, c) is Ordering.LESS


def test_sort_is_stable_and_consistent():
    grid = _grid()
    shuffled = grid[:]
    random.Random(3).shuffle(shuffled)
    assert sorted(shuffled) == sorted(grid)


@pytest.mark.parametrize(
    "eco,text",
    [
        (Ecosystem.NPM, "1.0.0-alpha.1"),
        (Ecosystem.NPM, "10.20.30"),
        (Ecosystem.CARGO, "0.1.0-rc.2"),
        (Ecosystem.PYPI, "1.4.0b2"),
        (Ecosystem.PYPI, "3.11.0"),
    ],
)
def test_render_round_trip(eco, text):
    version = parse_version(eco, text)
    assert parse_version(eco, render_version(eco, version)) == version
