"""Utility functions for depmetrics."""

import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from .exceptions import ParseError

logger = logging.getLogger(__name__)


def parse_timestamp(text: str) -> datetime:
    """
    Parse an RFC 3339 timestamp into an aware UTC datetime at second precision.

    Naive timestamps are taken as UTC; fractional seconds are dropped.

    Raises:
        ParseError: If the text is not an ISO 8601 / RFC 3339 timestamp
    """
    text = (text or "").strip()
    if not text:
        raise ParseError(text, reason="empty timestamp")
    try:
        value = datetime.fromisoformat(text.replace("z", "Z"))
    except ValueError as e:
        raise ParseError(text, reason="not an RFC 3339 timestamp") from e
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(value: datetime) -> str:
    """Render a UTC datetime as `YYYY-MM-DDTHH:MM:SSZ`."""
    return value.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def days_between(start: datetime, end: datetime) -> float:
    """Signed duration end - start in days."""
    return (end - start).total_seconds() / 86400


def parse_json_output(output: str) -> Optional[Any]:
    """
    Parse a JSON document.

    Args:
        output: JSON text

    Returns:
        Parsed JSON value or None if parsing fails
    """
    try:
        return json.loads(output)
    except json.JSONDecodeError as e:
        logger.debug(f"Failed to parse JSON: {e}")
        return None


def sha256_file(path: Path) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
