"""Directory loader: parses every document in a workspace directory and resolves it.

File kinds by suffix: ``*.dm.saf``, ``*.sq.csv``, ``*.matrix.csv`` (dimension
pair from front-matter), ``*.kpi.saf``, ``*.arch.saf``.
"""

from __future__ import annotations

from pathlib import Path

from ..diagnostics import Diagnostic, ParseResult, SourceLocation, diagnostic
from ..workspace import resolve_workspace
from .arch import parse_arch
from .dm import parse_dm
from .kpidoc import parse_kpi_document
from .matrix import parse_matrix
from .sq import parse_sq

SUFFIXES = (".dm.saf", ".sq.csv", ".matrix.csv", ".kpi.saf", ".arch.saf")


def document_kind(path: str | Path) -> str | None:
    name = str(path)
    for suffix in SUFFIXES:
        if name.endswith(suffix):
            return suffix.split(".")[1]
    return None


def parse_document(text: str, path: str | Path, known_metrics: set[str] | None = None) -> ParseResult:
    """Parse one document, picking the parser from the file suffix."""
    kind = document_kind(path)
    file = str(path)
    if kind == "dm":
        return parse_dm(text, file)
    if kind == "sq":
        return parse_sq(text, file)
    if kind == "matrix":
        return parse_matrix(text, file=file)
    if kind == "kpi":
        return parse_kpi_document(text, file, known_metrics)
    if kind == "arch":
        return parse_arch(text, file)
    return ParseResult(
        None,
        [diagnostic("E100", f"unrecognized document kind: {file}", SourceLocation(file, 1, 1))],
    )


def _read(path: Path, diagnostics: list[Diagnostic]) -> str | None:
    try:
        return path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        diagnostics.append(
            diagnostic("E100", f"cannot read {path}: {exc}", SourceLocation(str(path), 1, 1))
        )
        return None


def parse_workspace(directory: str | Path, extra_dirs: tuple[str | Path, ...] = ()) -> ParseResult:
    """Load every workspace document under directory (plus extra matrix dirs),
    then resolve. The result document is a Workspace."""
    diagnostics: list[Diagnostic] = []
    root = Path(directory)
    if not root.is_dir():
        return ParseResult(
            None,
            [diagnostic("E100", f"not a directory: {root}", SourceLocation(str(root), 1, 1))],
        )
    paths: list[Path] = []
    for base in (root, *map(Path, extra_dirs)):
        for suffix in SUFFIXES:
            paths.extend(sorted(base.glob(f"*{suffix}")))

    # SQ models first so KPI expressions can bind metrics at parse time.
    documents: list[object] = []
    known_metrics: set[str] = set()
    deferred: list[Path] = []
    for path in paths:
        if document_kind(path) == "sq":
            text = _read(path, diagnostics)
            if text is None:
                continue
            result = parse_sq(text, str(path))
            diagnostics.extend(result.diagnostics)
            if result.document is not None:
                documents.append(result.document)
                known_metrics.update(result.document.metric_ids())
        else:
            deferred.append(path)
    for path in deferred:
        text = _read(path, diagnostics)
        if text is None:
            continue
        result = parse_document(text, path, known_metrics)
        diagnostics.extend(result.diagnostics)
        if result.document is not None:
            documents.append(result.document)

    if any(d.is_error for d in diagnostics):
        return ParseResult(None, diagnostics)
    resolved = resolve_workspace(documents)
    diagnostics.extend(resolved.diagnostics)
    if resolved.workspace is None:
        return ParseResult(None, diagnostics)
    return ParseResult(resolved.workspace, diagnostics)
