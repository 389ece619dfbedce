"""Data models for depmetrics."""

from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .ecosystem import Ecosystem
from .requirements import RequirementExpr
from .versions import SemVersion


class DependencyKind(str, Enum):
    """Dependency kind as declared by the importing release."""

    REGULAR = "regular"
    DEV = "dev"
    OPTIONAL = "optional"


class IntervalWarning(str, Enum):
    """Per-interval warning codes."""

    DEPENDENCY_DROPPED = "dependency-dropped"
    IMPORTER_PRERELEASE_ONLY = "importer-prerelease-only"
    NO_STABLE_RELEASE = "no-stable-release"
    REQUIREMENT_UNPARSEABLE = "requirement-unparseable"
    UNKNOWN_PACKAGE = "unknown-package"
    UNRESOLVABLE = "unresolvable"


# intervals carrying these warnings are kept in intervals.jsonl but not aggregated
EXCLUDED_WARNINGS = frozenset(
    {
        IntervalWarning.DEPENDENCY_DROPPED,
        IntervalWarning.IMPORTER_PRERELEASE_ONLY,
        IntervalWarning.REQUIREMENT_UNPARSEABLE,
        IntervalWarning.UNKNOWN_PACKAGE,
    }
)


class WarningStage(str, Enum):
    """Pipeline stage that produced a warning."""

    PARSE_VERSION = "parse-version"
    PARSE_REQUIREMENT = "parse-requirement"
    RESOLVE = "resolve"
    ADVISORY = "advisory"
    TIMELINE = "timeline"


class PackageId(BaseModel):
    """Package identity within an ecosystem."""

    model_config = ConfigDict(frozen=True)

    ecosystem: Ecosystem = Field(..., description="Registry ecosystem")
    name: str = Field(..., description="Registry-canonical package name")

    @model_validator(mode="before")
    @classmethod
    def _canonicalize(cls, data):
        if isinstance(data, dict) and "name" in data and "ecosystem" in data:
            eco = Ecosystem(data["ecosystem"])
            data = {**data, "ecosystem": eco, "name": eco.canonical_name(data["name"])}
        return data

    @field_validator("name")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("package name must be non-empty")
        return value

    def __str__(self) -> str:
        return f"{self.ecosystem.value}/{self.name}"


class PackageRelease(BaseModel):
    """One release of a package (an element of REL(p))."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pkg: PackageId = Field(..., description="Released package")
    version: SemVersion = Field(..., description="Released version")
    released_at: datetime = Field(..., description="Release instant, UTC, second precision")


class DependencyEdge(BaseModel):
    """Requirement declared by one release of a package on another package."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    from_pkg: PackageId = Field(..., description="Importing package")
    from_version: SemVersion = Field(..., description="Importing release")
    to_pkg: PackageId = Field(..., description="Dependency")
    requirement: RequirementExpr = Field(..., description="Declared requirement")
    kind: DependencyKind = Field(DependencyKind.REGULAR, description="Dependency kind")

    @model_validator(mode="after")
    def _no_self_edge(self) -> "DependencyEdge":
        if self.from_pkg == self.to_pkg:
            raise ValueError(f"self-dependency on {self.from_pkg}")
        return self


class AffectedRange(BaseModel):
    """Affected version interval of an advisory; `fixed` is exclusive, `last_affected` inclusive."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    introduced: Optional[SemVersion] = Field(None, description="First affected version")
    fixed: Optional[SemVersion] = Field(None, description="First unaffected version")
    last_affected: Optional[SemVersion] = Field(None, description="Last affected version")

    @model_validator(mode="after")
    def _ordered(self) -> "AffectedRange":
        end = self.fixed or self.last_affected
        if self.introduced is not None and end is not None and end < self.introduced:
            raise ValueError(f"range end {end} precedes introduced {self.introduced}")
        return self

    def contains(self, version: SemVersion) -> bool:
        if self.introduced is not None and version < self.introduced:
            return False
        if self.fixed is not None:
            return version < self.fixed
        if self.last_affected is not None:
            return version <= self.last_affected
        return True


class Advisory(BaseModel):
    """Security advisory on one package."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: str = Field(..., description="Advisory id (e.g. GHSA-...)")
    pkg: PackageId = Field(..., description="Affected package")
    affected_ranges: tuple[AffectedRange, ...] = Field(default=(), description="Affected ranges")
    affected_versions: frozenset[SemVersion] = Field(
        default=frozenset(), description="Explicitly listed affected versions"
    )
    fixed_versions: tuple[SemVersion, ...] = Field(default=(), description="Fix versions")
    published_at: datetime = Field(..., description="Publication instant")


class IntervalRecord(BaseModel):
    """One stable interval of a (package, dependency) relation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    from_pkg: PackageId = Field(..., description="Importing package p_i")
    from_version: Optional[SemVersion] = Field(None, description="Importing release r_i")
    to_pkg: PackageId = Field(..., description="Dependency p_j")
    requirement: Optional[RequirementExpr] = Field(None, description="Requirement rq_ij")
    resolved: Optional[SemVersion] = Field(None, description="Resolved version r_j")
    highest: Optional[SemVersion] = Field(None, description="Highest available version r_j'")
    start: datetime = Field(..., description="Interval start T_k (inclusive)")
    end: datetime = Field(..., description="Interval end T_k+1 (exclusive)")
    is_out_of_date: bool = Field(False, description="Resolved version below highest")
    is_exposed: bool = Field(False, description="Outdated and affected by a fixed advisory")
    warning: Optional[IntervalWarning] = Field(None, description="Warning code")

    @model_validator(mode="after")
    def _consistent(self) -> "IntervalRecord":
        if self.end < self.start:
            raise ValueError(f"interval ends before it starts: {self.start} > {self.end}")
        if self.is_exposed and not self.is_out_of_date:
            raise ValueError("exposed interval must be out of date")
        return self

    @property
    def pair(self) -> tuple[PackageId, PackageId]:
        return (self.from_pkg, self.to_pkg)

    @property
    def duration_days(self) -> float:
        return (self.end - self.start).total_seconds() / 86400

    @property
    def included(self) -> bool:
        """Whether the interval takes part in metric aggregation."""
        return self.warning not in EXCLUDED_WARNINGS


class PairSummary(BaseModel):
    """Durations of one (package, dependency) relation, in days."""

    model_config = ConfigDict(frozen=True)

    from_pkg: PackageId = Field(..., description="Importing package")
    to_pkg: PackageId = Field(..., description="Dependency")
    tood_days: float = Field(0.0, ge=0, description="Time out of date")
    pfet_days: float = Field(0.0, ge=0, description="Post-fix exposure time")
    total_days: float = Field(0.0, ge=0, description="Relation lifetime")

    @model_validator(mode="after")
    def _nested(self) -> "PairSummary":
        if not self.pfet_days <= self.tood_days <= self.total_days:
            raise ValueError(
                f"expected pfet <= tood <= total, got {self.pfet_days}, {self.tood_days}, "
                f"{self.total_days}"
            )
        return self


class PackageMetrics(BaseModel):
    """TOOD/PFET aggregates of one package."""

    model_config = ConfigDict(frozen=True)

    pkg: PackageId = Field(..., description="Package")
    n_deps: int = Field(..., gt=0, description="Number of regular dependencies |DEP|")
    total_days: float = Field(..., ge=0, description="Summed relation lifetimes")
    tood_days: float = Field(..., ge=0, description="t_TOOD, averaged over dependencies")
    tood_ratio: float = Field(..., ge=0, le=1, description="Summed TOOD over summed lifetime")
    tood_ratio_eq2: float = Field(..., ge=0, le=1, description="tood_ratio divided by |DEP|")
    pfet_days: Optional[float] = Field(None, ge=0, description="t_PFET, absent if never exposed")
    pfet_ratio: Optional[float] = Field(None, ge=0, le=1, description="Summed PFET over lifetime")
    pfet_ratio_eq4: Optional[float] = Field(None, ge=0, le=1, description="pfet_ratio by |DEP|")


class WarningRecord(BaseModel):
    """One entry of the warning ledger."""

    model_config = ConfigDict(frozen=True)

    stage: WarningStage = Field(..., description="Stage that raised the warning")
    subject: str = Field(..., description="Row, package or pair concerned")
    reason: str = Field(..., description="Human-readable reason")
