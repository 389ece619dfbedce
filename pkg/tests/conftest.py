"""Shared fixtures."""

import pytest
from factories import (
    EXPRESS_QS_ADVISORY,
    EXPRESS_QS_DEPS,
    EXPRESS_QS_RELEASES,
    TTU_DEPS,
    TTU_RELEASES,
    WALKTHROUGH_ADVISORY,
    WALKTHROUGH_DEPS,
    WALKTHROUGH_RELEASES,
    rel,
    write_dataset,
)

from depmetrics.advisories import AdvisoryStore, parse_osv_document
from depmetrics.resolver import ReleaseIndex


@pytest.fixture
def express_qs_paths(tmp_path):
    return write_dataset(
        tmp_path / "express_qs", EXPRESS_QS_RELEASES, EXPRESS_QS_DEPS, [EXPRESS_QS_ADVISORY]
    )


@pytest.fixture
def ttu_paths(tmp_path):
    return write_dataset(tmp_path / "ttu", TTU_RELEASES, TTU_DEPS)


@pytest.fixture
def walkthrough_paths(tmp_path):
    return write_dataset(
        tmp_path / "walkthrough", WALKTHROUGH_RELEASES, WALKTHROUGH_DEPS, [WALKTHROUGH_ADVISORY]
    )


@pytest.fixture
def express_qs_index():
    return ReleaseIndex(rel(name, version, when) for _, name, version, when in EXPRESS_QS_RELEASES)


@pytest.fixture
def walkthrough_index():
    return ReleaseIndex(
        rel(name, version, when) for _, name, version, when in WALKTHROUGH_RELEASES
    )


@pytest.fixture
def walkthrough_store():
    return AdvisoryStore(parse_osv_document(WALKTHROUGH_ADVISORY))


@pytest.fixture
def vite_advisory_doc():
    return {
        "id": "GHSA-c24v-8rfc-w8vw",
        "published": "2024-01-19T20:27:47Z",
        "affected": [
            {
                "package": {"ecosystem": "npm", "name": "vite"},
                "ranges": [
                    {
                        "type": "SEMVER",
                        "events": [
                            {"introduced": "2.7.0"},
                            {"fixed": "2.9.17"},
                            {"introduced": "3.0.0"},
                            {"fixed": "3.2.8"},
                            {"introduced": "4.0.0"},
                            {"fixed": "4.5.2"},
                            {"introduced": "5.0.0"},
                            {"fixed": "5.0.12"},
                        ],
                    }
                ],
            }
        ],
    }
