"""Measure ingestion: an append-only JSONL log with a per-metric time index.

Record schema (one JSON object per line):

    {"run_id": "...", "timestamp": "2024-05-01T12:00:00Z", "metric": "ee_j",
     "value": 870.5, "unit": "J", "subject": "zahori_engine"}

``subject`` is optional. The dedup key is exactly (run_id, metric, timestamp);
the same value under a different run_id is two records.
"""

from __future__ import annotations

import bisect
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .diagnostics import SafError
from .model import is_identifier

MEASURES_FILENAME = "measures.jsonl"

_RFC3339_RE = re.compile(
    r"\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})"
)


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC3339 instant into an aware UTC datetime."""
    if not isinstance(text, str) or not _RFC3339_RE.fullmatch(text):
        raise ValueError(f"not an RFC3339 timestamp: {text!r}")
    normalized = text[:10] + "T" + text[11:]
    if normalized.endswith(("Z", "z")):
        normalized = normalized[:-1] + "+00:00"
    return datetime.fromisoformat(normalized).astimezone(timezone.utc)


def format_rfc3339(instant: datetime) -> str:
    utc = instant.astimezone(timezone.utc)
    base = utc.strftime("%Y-%m-%dT%H:%M:%S")
    if utc.microsecond:
        base += f".{utc.microsecond:06d}".rstrip("0")
    return base + "Z"


@dataclass(frozen=True)
class MeasureRecord:
    run_id: str
    timestamp: datetime
    metric: str
    value: float
    unit: str
    subject: str | None = None

    def to_json_line(self) -> str:
        payload: dict = {
            "run_id": self.run_id,
            "timestamp": format_rfc3339(self.timestamp),
            "metric": self.metric,
            "value": self.value,
            "unit": self.unit,
        }
        if self.subject is not None:
            payload["subject"] = self.subject
        return json.dumps(payload)


@dataclass(frozen=True)
class RejectedLine:
    line: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    accepted: int
    rejected: list[RejectedLine] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _parse_record(obj: dict) -> MeasureRecord:
    """Validate one decoded JSON object; raises ValueError with a short reason."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    for key in ("run_id", "timestamp", "metric", "value", "unit"):
        if key not in obj:
            raise ValueError(f"missing field {key}")
    run_id = obj["run_id"]
    if not isinstance(run_id, str) or not run_id:
        raise ValueError("run_id must be a non-empty string")
    timestamp = parse_rfc3339(obj["timestamp"])
    metric = obj["metric"]
    if not isinstance(metric, str) or not is_identifier(metric):
        raise ValueError(f"metric is not a valid identifier: {metric!r}")
    value = obj["value"]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValueError("value must be a finite number")
    unit = obj["unit"]
    if not isinstance(unit, str):
        raise ValueError("unit must be a string")
    subject = obj.get("subject")
    if subject is not None and (not isinstance(subject, str) or not is_identifier(subject)):
        raise ValueError(f"subject is not a valid identifier: {subject!r}")
    return MeasureRecord(run_id, timestamp, metric, float(value), unit, subject)


def _reject_nonfinite(_token: str) -> float:
    raise ValueError("value must be a finite number")


class MeasureStore:
    """Append-only measure log with a metric -> time-ordered index.

    Single writer, many readers: ingestion is serialized by the owning
    process; queries never mutate.
    """

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory is not None else None
        self._records: list[MeasureRecord] = []
        self._index: dict[str, list[MeasureRecord]] = {}
        self._keys: dict[str, list[datetime]] = {}
        self._seen: set[tuple[str, str, datetime]] = set()

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> tuple[MeasureRecord, ...]:
        return tuple(self._records)

    @property
    def log_path(self) -> Path | None:
        if self.directory is None:
            return None
        return self.directory / MEASURES_FILENAME

    def _add(self, record: MeasureRecord) -> bool:
        key = (record.run_id, record.metric, record.timestamp)
        if key in self._seen:
            return False
        self._seen.add(key)
        self._records.append(record)
        series = self._index.setdefault(record.metric, [])
        stamps = self._keys.setdefault(record.metric, [])
        at = bisect.bisect_right(stamps, record.timestamp)
        series.insert(at, record)
        stamps.insert(at, record.timestamp)
        return True

    def ingest_batch(
        self,
        lines: str,
        strict: bool = False,
        known_metrics: set[str] | None = None,
        metric_units: dict[str, str] | None = None,
    ) -> IngestResult:
        """Ingest a JSONL batch; never aborts on malformed lines.

        In strict mode, metrics absent from known_metrics are rejected with
        reason ``unknown_metric``; otherwise they are accepted with a note.
        Unit mismatches against metric_units always produce a note.
        """
        accepted: list[MeasureRecord] = []
        rejected: list[RejectedLine] = []
        notes: list[str] = []
        for lineno, raw in enumerate(lines.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw, parse_constant=_reject_nonfinite)
                record = _parse_record(obj)
            except (ValueError, TypeError) as exc:
                rejected.append(RejectedLine(lineno, str(exc)))
                continue
            if known_metrics is not None and record.metric not in known_metrics:
                if strict:
                    rejected.append(RejectedLine(lineno, f"unknown_metric: {record.metric}"))
                    continue
                notes.append(f"line {lineno}: metric {record.metric!r} not declared in any SQ model")
            expected_unit = (metric_units or {}).get(record.metric)
            if expected_unit is not None and expected_unit != record.unit:
                notes.append(
                    f"line {lineno}: unit {record.unit!r} differs from declared {expected_unit!r}"
                    f" for metric {record.metric!r}"
                )
            if not self._add(record):
                rejected.append(RejectedLine(lineno, "duplicate"))
                continue
            accepted.append(record)
        if accepted and self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a", encoding="utf-8") as fh:
                for record in accepted:
                    fh.write(record.to_json_line() + "\n")
        return IngestResult(len(accepted), rejected, notes)

    def query(self, metric: str, window: str, as_of: datetime) -> list[MeasureRecord]:
        """Records with timestamp in (as_of - window, as_of], ascending by time."""
        from .kpi import window_delta

        series = self._index.get(metric, [])
        stamps = self._keys.get(metric, [])
        hi = bisect.bisect_right(stamps, as_of)
        delta = window_delta(window)
        if delta is None:
            return list(series[:hi])
        lo = bisect.bisect_right(stamps, as_of - delta)
        return list(series[lo:hi])


def load_store(directory: str | Path) -> tuple[MeasureStore, list[str]]:
    """Rebuild a store by replaying measures.jsonl; tolerates a corrupt tail.

    Returns the store plus one warning per malformed or duplicate line.
    Raises SafError when the log exists but cannot be read.
    """
    store = MeasureStore(directory)
    path = store.log_path
    warnings: list[str] = []
    if not path.exists():
        return store, warnings
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise SafError("E100", f"cannot read measure log {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            record = _parse_record(json.loads(raw, parse_constant=_reject_nonfinite))
        except (ValueError, TypeError) as exc:
            warnings.append(f"{path.name}:{lineno}: skipped corrupt record ({exc})")
            continue
        if not store._add(record):
            warnings.append(f"{path.name}:{lineno}: skipped duplicate record")
    return store, warnings
