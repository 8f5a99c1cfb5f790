"""Parser for the .sq.csv SQ-model table.

Columns: ``qa_id,name,definition,source,dimensions,metrics`` where dimensions
are ``|``-joined and metrics are ``;``-joined entries ``id:kind:unit:"desc"``
(the quoted description is optional). An optional ``# id: <slug>`` front-matter
comment names the model; otherwise the file stem is used.
"""

from __future__ import annotations

import csv
import io

from ..diagnostics import Diagnostic, ParseResult, SourceLocation, diagnostic
from ..model import Dimension, MetricKind, MetricSpec, SQEntry, SQModel, is_identifier

HEADER = ["qa_id", "name", "definition", "source", "dimensions", "metrics"]


def split_front_matter(text: str) -> tuple[dict[str, str], str, int]:
    """Strip leading ``# key: value`` comment lines; returns (front, rest, rest_line)."""
    front: dict[str, str] = {}
    lines = text.splitlines(keepends=True)
    consumed = 0
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                front[key.strip()] = value.strip()
            consumed += 1
        elif not stripped and consumed < len(lines) and front:
            consumed += 1
        else:
            break
    return front, "".join(lines[consumed:]), consumed + 1


def document_id(front: dict[str, str], file: str, suffix: str, fallback: str) -> str:
    if "id" in front:
        return front["id"]
    stem = file.rsplit("/", 1)[-1]
    if stem.endswith(".csv") or stem.endswith(".saf"):
        stem = stem[:-4]
    if stem.endswith(suffix):
        stem = stem[: -len(suffix)]
    return stem if is_identifier(stem) else fallback


def _parse_metrics(
    field: str, location: SourceLocation
) -> tuple[list[MetricSpec], list[Diagnostic]]:
    metrics: list[MetricSpec] = []
    diagnostics: list[Diagnostic] = []
    for chunk in _split_quoted(field, ";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = _split_quoted(chunk, ":", maxsplit=3)
        if len(parts) < 3:
            diagnostics.append(
                diagnostic("E100", f"malformed metric {chunk!r} (expected id:kind:unit[:\"desc\"])", location)
            )
            continue
        metric_id, kind_text, unit = parts[0].strip(), parts[1].strip(), parts[2].strip()
        description: str | None = None
        if len(parts) == 4:
            raw = parts[3].strip()
            if len(raw) >= 2 and raw.startswith('"') and raw.endswith('"'):
                description = raw[1:-1]
            else:
                diagnostics.append(
                    diagnostic("E100", f"metric description must be quoted: {raw!r}", location)
                )
                continue
        if not is_identifier(metric_id):
            diagnostics.append(diagnostic("E100", f"invalid metric id {metric_id!r}", location))
            continue
        try:
            kind = MetricKind.from_text(kind_text)
        except ValueError:
            diagnostics.append(diagnostic("E102", f"metric kind out of range: {kind_text!r}", location))
            continue
        metrics.append(MetricSpec(metric_id, metric_id, kind, unit, description, location=location))
    return metrics, diagnostics


def _split_quoted(text: str, sep: str, maxsplit: int = -1) -> list[str]:
    """Split on sep outside double quotes."""
    parts: list[str] = []
    buf: list[str] = []
    in_quotes = False
    splits = 0
    for ch in text:
        if ch == '"':
            in_quotes = not in_quotes
            buf.append(ch)
        elif ch == sep and not in_quotes and (maxsplit < 0 or splits < maxsplit):
            parts.append("".join(buf))
            buf = []
            splits += 1
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def parse_sq(text: str, file: str = "<sq>") -> ParseResult:
    """Parse an SQ model CSV; one SQEntry per data row."""
    front, body, first_line = split_front_matter(text)
    doc_id = document_id(front, file, ".sq", "sq_model")
    diagnostics: list[Diagnostic] = []
    if not is_identifier(doc_id):
        diagnostics.append(
            diagnostic("E100", f"invalid SQ model id {doc_id!r}", SourceLocation(file, 1, 1))
        )
        return ParseResult(None, diagnostics)

    try:
        rows = list(csv.reader(io.StringIO(body)))
    except csv.Error as exc:
        diagnostics.append(
            diagnostic("E100", f"malformed CSV: {exc}", SourceLocation(file, first_line, 1))
        )
        return ParseResult(None, diagnostics)
    if not rows or not any(cell.strip() for cell in rows[0]):
        return ParseResult(SQModel(id=doc_id), diagnostics)
    header = [cell.strip() for cell in rows[0]]
    if header != HEADER:
        diagnostics.append(
            diagnostic(
                "E100",
                f"malformed header row (expected {','.join(HEADER)})",
                SourceLocation(file, first_line, 1),
            )
        )
        return ParseResult(None, diagnostics)

    entries: list[SQEntry] = []
    for offset, row in enumerate(rows[1:], start=1):
        location = SourceLocation(file, first_line + offset, 1)
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            diagnostics.append(
                diagnostic("E100", f"malformed row: expected {len(HEADER)} fields, found {len(row)}", location)
            )
            continue
        qa_id, name, definition, source, dims_text, metrics_text = row
        qa_id = qa_id.strip()
        if not is_identifier(qa_id):
            diagnostics.append(diagnostic("E100", f"invalid qa_id {qa_id!r}", location))
            continue
        dimensions: set[Dimension] = set()
        bad_dim = False
        for dim_text in dims_text.split("|"):
            dim_text = dim_text.strip()
            if not dim_text:
                continue
            try:
                dimensions.add(Dimension.from_text(dim_text))
            except ValueError:
                diagnostics.append(diagnostic("E102", f"dimension out of range: {dim_text!r}", location))
                bad_dim = True
        if bad_dim:
            continue
        if not dimensions:
            diagnostics.append(diagnostic("E100", "entry must name at least one dimension", location))
            continue
        metrics, metric_diags = _parse_metrics(metrics_text, location)
        diagnostics.extend(metric_diags)
        if any(d.is_error for d in metric_diags):
            continue
        entries.append(
            SQEntry(
                qa_id=qa_id,
                name=name,
                definition=definition,
                source_ref=source,
                dimensions=frozenset(dimensions),
                metrics=tuple(metrics),
                location=location,
            )
        )
    if any(d.is_error for d in diagnostics):
        return ParseResult(None, diagnostics)

    qa_ids = [e.qa_id for e in entries]
    for entry in entries:
        if qa_ids.count(entry.qa_id) > 1:
            diagnostics.append(
                diagnostic("E002", f"duplicate qa_id {entry.qa_id!r}", entry.location, entry.qa_id)
            )
            return ParseResult(None, diagnostics)
    metric_ids = [m.id for e in entries for m in e.metrics]
    for e in entries:
        for m in e.metrics:
            if metric_ids.count(m.id) > 1:
                diagnostics.append(
                    diagnostic("E002", f"duplicate metric id {m.id!r}", e.location, m.id)
                )
                return ParseResult(None, diagnostics)
    return ParseResult(SQModel(id=doc_id, entries=tuple(entries)), diagnostics)
