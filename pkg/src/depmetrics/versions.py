"""Semantic versions: parsing, ordering and rendering per ecosystem."""

import re
from enum import Enum
from functools import total_ordering
from typing import Iterable

from packaging.version import InvalidVersion, Version

from .ecosystem import Ecosystem
from .exceptions import ParseError

_IDENT = r"(?:0|[1-9]\d*|\d*[A-Za-z-][0-9A-Za-z-]*)"
SEMVER_RE = re.compile(
    r"^(?P<v>v)?(?P<major>0|[1-9]\d*)\.(?P<minor>0|[1-9]\d*)\.(?P<patch>0|[1-9]\d*)"
    rf"(?:-(?P<pre>{_IDENT}(?:\.{_IDENT})*))?"
    r"(?:\+(?P<build>[0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?$"
)


class Ordering(str, Enum):
    """Result of compare_versions."""

    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def _identifier(part: str) -> int | str:
    return int(part) if part.isdigit() else part


def _prerelease_key(prerelease: tuple[int | str, ...]) -> tuple:
    # numeric identifiers sort before alphanumeric ones
    return tuple((0, p, "") if isinstance(p, int) else (1, 0, p) for p in prerelease)


@total_ordering
class SemVersion:
    """
    Immutable semantic version.

    Ordering follows SEMVER precedence: (major, minor, patch) numerically, then any
    prerelease sorts below the release. Build metadata and the original text take no
    part in equality or ordering.
    """

    __slots__ = ("major", "minor", "patch", "prerelease", "build", "original_text", "_key")

    def __init__(
        self,
        major: int,
        minor: int,
        patch: int,
        prerelease: Iterable[int | str] = (),
        build: Iterable[str] = (),
        original_text: str | None = None,
    ):
        if major < 0 or minor < 0 or patch < 0:
            raise ParseError(f"{major}.{minor}.{patch}", reason="negative component")
        self.major = major
        self.minor = minor
        self.patch = patch
        self.prerelease = tuple(prerelease)
        self.build = tuple(build)
        self.original_text = original_text or self._semver_text()
        self._key = (
            major,
            minor,
            patch,
            0 if self.prerelease else 1,
            _prerelease_key(self.prerelease),
        )

    def _semver_text(self) -> str:
        text = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            text += "-" + ".".join(str(p) for p in self.prerelease)
        return text

    @property
    def core(self) -> tuple[int, int, int]:
        return (self.major, self.minor, self.patch)

    @property
    def is_prerelease(self) -> bool:
        return bool(self.prerelease)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemVersion):
            return NotImplemented
        return self._key == other._key

    def __lt__(self, other: "SemVersion") -> bool:
        if not isinstance(other, SemVersion):
            return NotImplemented
        return self._key < other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f'SemVersion("{self._semver_text()}")'

    def __str__(self) -> str:
        return self._semver_text()


def _parse_semver(eco: Ecosystem, text: str) -> SemVersion:
    match = SEMVER_RE.match(text)
    if not match:
        raise ParseError(text, reason=f"not a {eco.value} semantic version")
    if match.group("v") and eco is not Ecosystem.NPM:
        raise ParseError(text, reason="leading 'v' is only tolerated for npm")
    pre = match.group("pre")
    build = match.group("build")
    return SemVersion(
        int(match.group("major")),
        int(match.group("minor")),
        int(match.group("patch")),
        prerelease=[_identifier(p) for p in pre.split(".")] if pre else (),
        build=build.split(".") if build else (),
        original_text=text,
    )


def _parse_pep440(text: str) -> SemVersion:
    if "!" in text:
        raise ParseError(text, reason="epoch segments are not supported")
    try:
        version = Version(text)
    except InvalidVersion as e:
        raise ParseError(text, reason="not a PEP 440 version") from e

    if version.post is not None:
        raise ParseError(text, reason="post releases are not supported")
    if version.dev is not None:
        raise ParseError(text, reason="dev releases are not supported")
    if version.local is not None:
        raise ParseError(text, reason="local versions are not supported")

    release = version.release
    if len(release) == 2:
        release = (*release, 0)
    elif len(release) != 3:
        raise ParseError(text, reason=f"{len(release)} release components")

    prerelease: tuple[int | str, ...] = ()
    if version.pre is not None:
        tag, number = version.pre
        prerelease = (tag, number)
    return SemVersion(*release, prerelease=prerelease, original_text=text)


def parse_version(eco: Ecosystem, text: str) -> SemVersion:
    """
    Parse a registry version string into a SemVersion.

    npm and cargo versions must be strict SEMVER. PyPI versions are accepted when
    they have two or three release components and no epoch, post, dev or local
    segment; two-component forms gain patch 0.

    Raises:
        ParseError: If the text is empty or outside the supported subset
    """
    text = (text or "").strip()
    if not text:
        raise ParseError(text, reason="empty version")
    if eco is Ecosystem.PYPI:
        return _parse_pep440(text)
    return _parse_semver(eco, text)


def render_version(eco: Ecosystem, version: SemVersion) -> str:
    """Render a version in the canonical text form of its ecosystem."""
    base = f"{version.major}.{version.minor}.{version.patch}"
    if not version.prerelease:
        return base
    if eco is Ecosystem.PYPI and len(version.prerelease) == 2:
        tag, number = version.prerelease
        return f"{base}{tag}{number}"
    return base + "-" + ".".join(str(p) for p in version.prerelease)


def compare_versions(a: SemVersion, b: SemVersion) -> Ordering:
    """Compare two versions under SEMVER precedence."""
    if a < b:
        return Ordering.LESS
    if a == b:
        return Ordering.EQUAL
    return Ordering.GREATER
