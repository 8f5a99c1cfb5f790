"""Parser for the .matrix.csv interdimensional dependency grid.

Front-matter names the dimension pair (and optionally the id), keeping the
grid itself pure CSV:

    # id: tech_env
    # dims: technical x environmental
    ,modifiability,recoverability
    interoperability,-,
    scalability,+,I

The first row holds column QA ids, the first column row QA ids; cells are
``+``, ``-``, ``I`` or blank (blank cells are omitted from the map).
"""

from __future__ import annotations

import csv
import io

from ..diagnostics import Diagnostic, ParseResult, SourceLocation, diagnostic
from ..model import DependencyMatrix, DependencyValue, Dimension, is_identifier, slugify
from .sq import document_id, split_front_matter


def _normalize_header(cell: str) -> str:
    """Slug-normalize a QA header; already-valid identifiers pass through."""
    text = cell.strip()
    if not text:
        return ""
    return text if is_identifier(text) else slugify(text)


def _parse_dims(
    front: dict[str, str], file: str
) -> tuple[Dimension | None, Dimension | None, list[Diagnostic]]:
    raw = front.get("dims")
    if raw is None:
        return None, None, []
    parts = [p.strip() for p in raw.split("x")]
    location = SourceLocation(file, 1, 1)
    if len(parts) != 2:
        return None, None, [diagnostic("E100", f"malformed dims front-matter: {raw!r}", location)]
    try:
        return Dimension.from_text(parts[0]), Dimension.from_text(parts[1]), []
    except ValueError:
        return None, None, [diagnostic("E102", f"dimension out of range in dims: {raw!r}", location)]


def parse_matrix(
    text: str,
    row_dim: Dimension | None = None,
    col_dim: Dimension | None = None,
    file: str = "<matrix>",
) -> ParseResult:
    """Parse a dependency grid; dimensions come from arguments or front-matter."""
    front, body, first_line = split_front_matter(text)
    diagnostics: list[Diagnostic] = []
    fm_row, fm_col, dim_diags = _parse_dims(front, file)
    diagnostics.extend(dim_diags)
    row_dim = row_dim or fm_row
    col_dim = col_dim or fm_col
    top = SourceLocation(file, 1, 1)
    if row_dim is None or col_dim is None:
        if not dim_diags:
            diagnostics.append(
                diagnostic("E100", "matrix dimension pair missing (no arguments, no '# dims:' front-matter)", top)
            )
        return ParseResult(None, diagnostics)
    if row_dim == col_dim:
        diagnostics.append(
            diagnostic("E100", f"matrix dimensions must differ, got {row_dim.value} x {col_dim.value}", top)
        )
        return ParseResult(None, diagnostics)
    doc_id = document_id(front, file, ".matrix", "matrix")
    if not is_identifier(doc_id):
        diagnostics.append(diagnostic("E100", f"invalid matrix id {doc_id!r}", top))
        return ParseResult(None, diagnostics)

    try:
        rows = [row for row in csv.reader(io.StringIO(body))]
    except csv.Error as exc:
        diagnostics.append(diagnostic("E100", f"malformed CSV: {exc}", top))
        return ParseResult(None, diagnostics)
    rows = [row for row in rows if any(cell.strip() for cell in row)]
    if not rows:
        matrix = DependencyMatrix(doc_id, row_dim, col_dim)
        return ParseResult(matrix, diagnostics)

    header = rows[0]
    width = len(header)
    col_ids = []
    for index, cell in enumerate(header[1:], start=2):
        qa = _normalize_header(cell)
        if not qa:
            diagnostics.append(
                diagnostic("E100", "empty column header", SourceLocation(file, first_line, index))
            )
            continue
        col_ids.append(qa)

    row_ids: list[str] = []
    cells: dict = {}
    for offset, row in enumerate(rows[1:], start=1):
        location = SourceLocation(file, first_line + offset, 1)
        if len(row) != width:
            diagnostics.append(
                diagnostic("E100", f"ragged grid: expected {width} cells, found {len(row)}", location)
            )
            continue
        row_qa = _normalize_header(row[0])
        if not row_qa:
            diagnostics.append(diagnostic("E100", "empty row header", location))
            continue
        row_ids.append(row_qa)
        for col_index, cell in enumerate(row[1:]):
            value = cell.strip()
            if not value:
                continue
            try:
                dep = DependencyValue.from_text(value)
            except ValueError:
                diagnostics.append(
                    diagnostic(
                        "E102",
                        f"cell value out of range: {value!r} (expected +, -, I or blank)",
                        SourceLocation(file, first_line + offset, col_index + 2),
                    )
                )
                continue
            if col_index < len(col_ids):
                cells[(row_qa, col_ids[col_index])] = dep

    for axis, ids in (("row", row_ids), ("column", col_ids)):
        dupes = sorted({qa for qa in ids if ids.count(qa) > 1})
        for qa in dupes:
            diagnostics.append(
                diagnostic("E002", f"duplicate {axis} header {qa!r}", SourceLocation(file, first_line, 1), qa)
            )
    if any(d.is_error for d in diagnostics):
        return ParseResult(None, diagnostics)
    matrix = DependencyMatrix(
        id=doc_id,
        row_dimension=row_dim,
        col_dimension=col_dim,
        rows=tuple(row_ids),
        cols=tuple(col_ids),
        cells=cells,
    )
    return ParseResult(matrix, diagnostics)
