"""Run configuration: YAML file, validated models and logging setup."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .ecosystem import Ecosystem
from .exceptions import ParseError, UsageError
from .stats import StatsConfig
from .utils import parse_timestamp

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config" / "config.yaml"


class RunConfig(BaseModel):
    """Run-level parameters of a pipeline invocation."""

    releases_path: Path = Field(Path("data/releases.csv"), description="releases.csv")
    deps_path: Path = Field(Path("data/deps.csv"), description="deps.csv")
    advisories_path: Optional[Path] = Field(None, description="Directory of OSV documents")
    ecosystems: list[Ecosystem] = Field(
        default_factory=list, description="Ecosystem filter; empty keeps every ecosystem"
    )
    cutoff: Optional[datetime] = Field(
        None, description="End of every lifetime; latest dataset timestamp when unset"
    )
    window_start: Optional[datetime] = Field(None, description="Metric window start")
    window_end: Optional[datetime] = Field(None, description="Metric window end")
    min_versions: int = Field(5, ge=0, description="Package filter: minimum releases")
    min_age_days: float = Field(30, ge=0, description="Package filter: minimum age in days")
    include_prereleases: bool = Field(False, description="Resolve to prereleases too")
    output_dir: Path = Field(Path("out"), description="Output directory")
    rng_seed: int = Field(0, description="Seed for random draws")
    workers: int = Field(1, ge=1, description="Processes for pair resolution")
    osv_read_concurrency: int = Field(32, ge=1, description="Concurrent advisory file reads")
    config_path: Optional[Path] = Field(None, description="File the config was read from")
    stats: StatsConfig = Field(default_factory=StatsConfig, description="Statistics settings")

    @field_validator("ecosystems", mode="before")
    @classmethod
    def _ecosystems(cls, value: Any) -> Any:
        if value is None:
            return []
        return [Ecosystem.from_label(v) if isinstance(v, str) else v for v in value]

    @field_validator("cutoff", "window_start", "window_end", mode="before")
    @classmethod
    def _timestamp(cls, value: Any) -> Any:
        if isinstance(value, str):
            return parse_timestamp(value)
        return value

    @model_validator(mode="after")
    def _window_order(self) -> "RunConfig":
        if self.window_start and self.window_end and self.window_end < self.window_start:
            raise ValueError("window_end precedes window_start")
        return self


def load_config(config_path: Path | str | None = None) -> Dict[str, Any]:
    """Load configuration from YAML file."""
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    try:
        with open(path, "r") as f:
            return yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"Config file {path} not found, using defaults")
        return {}
    except yaml.YAMLError as e:
        raise UsageError(f"config file {path} is not valid YAML: {e}") from e


def build_run_config(
    raw: Dict[str, Any],
    overrides: Dict[str, Any] | None = None,
    config_path: Path | str | None = None,
) -> RunConfig:
    """
    Flatten the `depmetrics` sections of a loaded YAML document into a RunConfig.

    Args:
        raw: Loaded YAML document
        overrides: Values from the command line; None entries are ignored
        config_path: Where the document came from

    Raises:
        UsageError: If a value fails validation
    """
    section = raw.get("depmetrics", {}) or {}
    inputs = section.get("inputs", {}) or {}
    analysis = section.get("analysis", {}) or {}
    performance = section.get("performance", {}) or {}
    output = section.get("output", {}) or {}
    stats = dict(section.get("stats", {}) or {})

    values: Dict[str, Any] = {
        "releases_path": inputs.get("releases"),
        "deps_path": inputs.get("deps"),
        "advisories_path": inputs.get("advisories"),
        "ecosystems": inputs.get("ecosystems"),
        "cutoff": analysis.get("cutoff"),
        "window_start": analysis.get("window_start"),
        "window_end": analysis.get("window_end"),
        "min_versions": analysis.get("min_versions"),
        "min_age_days": analysis.get("min_age_days"),
        "include_prereleases": analysis.get("include_prereleases"),
        "workers": performance.get("workers"),
        "osv_read_concurrency": performance.get("osv_read_concurrency"),
        "output_dir": output.get("dir"),
        "rng_seed": stats.get("rng_seed"),
    }
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    if values.get("rng_seed") is not None:
        stats["rng_seed"] = values["rng_seed"]

    try:
        return RunConfig(
            **{k: v for k, v in values.items() if v is not None},
            stats=StatsConfig(**stats),
            config_path=Path(config_path) if config_path else None,
        )
    except (ValidationError, ParseError) as e:
        raise UsageError(f"invalid configuration: {e}") from e


def setup_logging(config: dict):
    """Setup logging from config."""
    log_config = config.get("depmetrics", {}).get("logging", {}) or {}
    level = getattr(logging, str(log_config.get("level", "INFO")).upper(), logging.INFO)
    format_str = log_config.get("format", "%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    logging.basicConfig(level=level, format=format_str)
