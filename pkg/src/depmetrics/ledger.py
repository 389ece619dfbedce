"""Append-only ledger of data warnings."""

import logging
from collections import Counter
from typing import Iterable

from .models import WarningRecord, WarningStage

logger = logging.getLogger(__name__)


class WarningLedger:
    """Collects WarningRecords in arrival order and counts them per stage."""

    def __init__(self):
        self._records: list[WarningRecord] = []

    def record(self, stage: WarningStage, subject: str, reason: str) -> WarningRecord:
        """
        Append a warning.

        Args:
            stage: Stage that raised the warning
            subject: Row, package or pair concerned
            reason: Human-readable reason

        Returns:
            The stored record
        """
        entry = WarningRecord(stage=stage, subject=subject, reason=reason)
        self._records.append(entry)
        logger.debug(f"[{stage.value}] {subject}: {reason}")
        return entry

    def extend(self, records: Iterable[WarningRecord]):
        self._records.extend(records)

    def counts(self) -> dict[str, int]:
        """Number of warnings per stage, every stage present."""
        counter = Counter(r.stage for r in self._records)
        return {stage.value: counter.get(stage, 0) for stage in WarningStage}

    def rows(self) -> list[WarningRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)
