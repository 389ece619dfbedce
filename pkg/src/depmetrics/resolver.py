"""Point-in-time dependency resolution over a release index."""

import bisect
import logging
from collections import defaultdict
from datetime import datetime
from typing import Iterable

from .exceptions import UnknownPackageError
from .models import PackageId, PackageRelease
from .requirements import RequirementExpr
from .versions import SemVersion

logger = logging.getLogger(__name__)


class _PackageReleases:
    """Release history of one package, in both time and version order."""

    __slots__ = ("by_time", "times", "by_version", "released_at", "_prefix_max", "_prefix_stable")

    def __init__(self, releases: list[PackageRelease]):
        self.by_time = sorted(releases, key=lambda r: (r.released_at, r.version))
        self.times = [r.released_at for r in self.by_time]
        self.by_version = sorted(releases, key=lambda r: r.version, reverse=True)
        self.released_at = {r.version: r.released_at for r in releases}

        # prefix maxima over time order make "highest at t" a bisect + lookup
        self._prefix_max: list[SemVersion | None] = []
        self._prefix_stable: list[SemVersion | None] = []
        best: SemVersion | None = None
        best_stable: SemVersion | None = None
        for release in self.by_time:
            v = release.version
            if best is None or v > best:
                best = v
            if not v.prerelease and (best_stable is None or v > best_stable):
                best_stable = v
            self._prefix_max.append(best)
            self._prefix_stable.append(best_stable)

    def available_count(self, t: datetime) -> int:
        return bisect.bisect_right(self.times, t)

    def highest(self, t: datetime, include_prereleases: bool) -> SemVersion | None:
        count = self.available_count(t)
        if count == 0:
            return None
        prefix = self._prefix_max if include_prereleases else self._prefix_stable
        return prefix[count - 1]


class ReleaseIndex:
    """
    Read-only index of releases per package.

    Releases are kept sorted by release time and by version; lookups never mutate
    the index, so one instance can be shared by every worker.
    """

    def __init__(self, releases: Iterable[PackageRelease], include_prereleases: bool = False):
        """
        Build index.

        Args:
            releases: Releases of every package in the dataset
            include_prereleases: Treat prereleases as regular resolution candidates
        """
        self.include_prereleases = include_prereleases
        grouped: dict[PackageId, list[PackageRelease]] = defaultdict(list)
        for release in releases:
            grouped[release.pkg].append(release)
        self._packages = {pkg: _PackageReleases(rels) for pkg, rels in grouped.items()}
        logger.debug(f"Indexed releases of {len(self._packages)} packages")

    def __contains__(self, pkg: PackageId) -> bool:
        return pkg in self._packages

    def __len__(self) -> int:
        return len(self._packages)

    def _get(self, pkg: PackageId) -> _PackageReleases:
        entry = self._packages.get(pkg)
        if entry is None:
            raise UnknownPackageError(str(pkg))
        return entry

    def packages(self) -> list[PackageId]:
        return sorted(self._packages, key=lambda p: (p.ecosystem.value, p.name))

    def releases(self, pkg: PackageId) -> list[PackageRelease]:
        """Releases of a package in time order."""
        return list(self._get(pkg).by_time)

    def releases_by_version(self, pkg: PackageId) -> list[PackageRelease]:
        """Releases of a package, highest version first."""
        return list(self._get(pkg).by_version)

    def released_at(self, pkg: PackageId, version: SemVersion) -> datetime | None:
        """Release instant of a version, or None if the version was never released."""
        entry = self._packages.get(pkg)
        if entry is None:
            return None
        return entry.released_at.get(version)

    def release_count(self, pkg: PackageId) -> int:
        entry = self._packages.get(pkg)
        return len(entry.by_time) if entry else 0

    def total_releases(self) -> int:
        return sum(len(entry.by_time) for entry in self._packages.values())

    def highest_available_at(self, pkg: PackageId, t: datetime) -> SemVersion | None:
        return self._get(pkg).highest(t, self.include_prereleases)

    def resolve_at(self, req: RequirementExpr, pkg: PackageId, t: datetime) -> SemVersion | None:
        entry = self._get(pkg)
        for release in entry.by_version:
            if release.released_at <= t and req.matches(release.version, self.include_prereleases):
                return release.version
        return None

    def latest_release_at(
        self, pkg: PackageId, t: datetime, candidates: set[SemVersion] | None = None
    ) -> SemVersion | None:
        """
        Highest stable version of a package released at or before t.

        Args:
            pkg: Package
            t: Instant
            candidates: Restrict to these versions when given
        """
        entry = self._get(pkg)
        for release in entry.by_version:
            if release.released_at > t:
                continue
            if release.version.prerelease and not self.include_prereleases:
                continue
            if candidates is None or release.version in candidates:
                return release.version
        return None


def matches(req: RequirementExpr, version: SemVersion, include_prereleases: bool = False) -> bool:
    """True iff the version satisfies the requirement under its ecosystem's rules."""
    return req.matches(version, include_prereleases)


def resolve_at(
    req: RequirementExpr, idx: ReleaseIndex, dep: PackageId, t: datetime
) -> SemVersion | None:
    """
    Version an installer would have picked at instant t.

    Returns the highest version released at or before t that satisfies the
    requirement, or None when nothing matches.

    Raises:
        UnknownPackageError: If the dependency has no releases in the index
    """
    return idx.resolve_at(req, dep, t)


def highest_available_at(idx: ReleaseIndex, dep: PackageId, t: datetime) -> SemVersion | None:
    """
    Highest stable version of the dependency released at or before t.

    Ordering is by version, not by time: a lower version published later (a
    backport) never replaces a higher one.

    Raises:
        UnknownPackageError: If the dependency has no releases in the index
    """
    return idx.highest_available_at(dep, t)
