"""Parser for the .kpi.saf KPI-model DSL.

Grammar (flat blocks; the document id rides in ``# id:`` front-matter):

    goal   := "goal" ID STRING ("sustainability_goal" ID)?
    csf    := "csf" ID STRING "goal" ID
    kpi    := "kpi" ID STRING "csf" ID "expr" STRING
              "target" CMP NUMBER "unit" STRING
              "concerns" ID+ ("on_miss" ID+)?
    action := "action" ID STRING ("concerns" ID+)?
"""

from __future__ import annotations

from ..diagnostics import Diagnostic, ParseResult, diagnostic
from ..kpi import (
    ActionSpec,
    CriticalSuccessFactor,
    KpiDocument,
    KpiSpec,
    OrganizationalGoal,
    Target,
    parse_expression,
)
from ..model import is_identifier
from ._lexer import TokenCursor, tokenize
from .sq import document_id, split_front_matter

BLOCK_KEYWORDS = {"goal", "csf", "kpi", "action"}
COMPARATOR_TOKENS = {"<", "<=", ">", ">="}


def parse_kpi_document(
    text: str, file: str = "<kpi>", known_metrics: set[str] | None = None
) -> ParseResult:
    """Parse a KPI document; metric existence is checked when known_metrics is given
    (the directory loader passes the SQ models' metrics), otherwise at resolution."""
    front, body, first_line = split_front_matter(text)
    doc_id = document_id(front, file, ".kpi", "kpi_model")
    diagnostics: list[Diagnostic] = []
    if not is_identifier(doc_id):
        from ..diagnostics import SourceLocation

        diagnostics.append(
            diagnostic("E100", f"invalid KPI document id {doc_id!r}", SourceLocation(file, 1, 1))
        )
        return ParseResult(None, diagnostics)
    lexed = tokenize(text, file)
    if lexed.diagnostics:
        return ParseResult(None, lexed.diagnostics)
    cursor = TokenCursor(lexed.tokens)

    goals: list[OrganizationalGoal] = []
    csfs: list[CriticalSuccessFactor] = []
    kpis: list[KpiSpec] = []
    actions: list[ActionSpec] = []

    while not cursor.at_end():
        tok = cursor.current
        if tok.kind != "ident":
            cursor.error("E100", f"expected a block keyword, found {tok.value or tok.kind!r}")
            break
        if tok.value not in BLOCK_KEYWORDS:
            cursor.error("E101", f"unknown keyword {tok.value!r}", tok.location)
            break
        keyword = cursor.advance().value
        ok = True
        if keyword == "goal":
            ok = _goal(cursor, goals)
        elif keyword == "csf":
            ok = _csf(cursor, csfs)
        elif keyword == "kpi":
            ok = _kpi(cursor, kpis, known_metrics)
        elif keyword == "action":
            ok = _action(cursor, actions)
        if not ok:
            cursor.skip_to_keywords(BLOCK_KEYWORDS)

    diagnostics.extend(cursor.diagnostics)
    _check_unique(diagnostics, "goal", goals)
    _check_unique(diagnostics, "csf", csfs)
    _check_unique(diagnostics, "kpi", kpis)
    _check_unique(diagnostics, "action", actions)
    if any(d.is_error for d in diagnostics):
        return ParseResult(None, diagnostics)
    doc = KpiDocument(
        id=doc_id,
        goals=tuple(goals),
        csfs=tuple(csfs),
        kpis=tuple(kpis),
        actions=tuple(actions),
    )
    return ParseResult(doc, diagnostics)


def _check_unique(diagnostics: list[Diagnostic], kind: str, items) -> None:
    ids = [item.id for item in items]
    for item in items:
        if ids.count(item.id) > 1:
            diagnostics.append(
                diagnostic("E002", f"duplicate {kind} identifier {item.id!r}", item.location, item.id)
            )
            return


def _ident_list(cursor: TokenCursor) -> list[str]:
    values: list[str] = []
    while cursor.check("ident") and cursor.current.value not in BLOCK_KEYWORDS:
        if cursor.current.value in ("on_miss",):
            break
        values.append(cursor.advance().value)
    return values


def _goal(cursor: TokenCursor, out: list[OrganizationalGoal]) -> bool:
    gid = cursor.expect_ident("goal id")
    statement = cursor.expect_string("goal statement")
    if gid is None or statement is None:
        return False
    ref: str | None = None
    if cursor.accept("ident", "sustainability_goal"):
        ref_tok = cursor.expect_ident("sustainability goal id")
        if ref_tok is None:
            return False
        ref = ref_tok.value
    out.append(OrganizationalGoal(gid.value, statement.value, ref, location=gid.location))
    return True


def _csf(cursor: TokenCursor, out: list[CriticalSuccessFactor]) -> bool:
    cid = cursor.expect_ident("csf id")
    statement = cursor.expect_string("csf statement")
    if cid is None or statement is None:
        return False
    if cursor.expect("ident", "goal", what="'goal'") is None:
        return False
    goal_ref = cursor.expect_ident("organizational goal id")
    if goal_ref is None:
        return False
    out.append(CriticalSuccessFactor(cid.value, statement.value, goal_ref.value, location=cid.location))
    return True


def _kpi(cursor: TokenCursor, out: list[KpiSpec], known_metrics: set[str] | None) -> bool:
    kid = cursor.expect_ident("kpi id")
    name = cursor.expect_string("kpi name")
    if kid is None or name is None:
        return False
    if cursor.expect("ident", "csf", what="'csf'") is None:
        return False
    csf_ref = cursor.expect_ident("csf id")
    if csf_ref is None:
        return False
    if cursor.expect("ident", "expr", what="'expr'") is None:
        return False
    expr_tok = cursor.expect_string("fitness expression")
    if expr_tok is None:
        return False
    expression, expr_diags = parse_expression(expr_tok.value, known_metrics, expr_tok.location)
    cursor.diagnostics.extend(expr_diags)
    if expression is None:
        return False
    if cursor.expect("ident", "target", what="'target'") is None:
        return False
    cmp_tok = cursor.current
    if not (cmp_tok.kind == "punct" and cmp_tok.value in COMPARATOR_TOKENS):
        cursor.error("E100", f"expected comparator (<, <=, >, >=), found {cmp_tok.value!r}")
        return False
    cursor.advance()
    threshold_tok = cursor.expect("number", what="target threshold")
    if threshold_tok is None:
        return False
    try:
        threshold = float(threshold_tok.value)
    except ValueError:
        cursor.error("E100", f"malformed number {threshold_tok.value!r}", threshold_tok.location)
        return False
    if cursor.expect("ident", "unit", what="'unit'") is None:
        return False
    unit_tok = cursor.expect_string("target unit")
    if unit_tok is None:
        return False
    if cursor.expect("ident", "concerns", what="'concerns'") is None:
        return False
    concerns = _ident_list(cursor)
    if not concerns:
        cursor.error("E100", "expected at least one concern id after 'concerns'")
        return False
    on_miss: list[str] = []
    if cursor.accept("ident", "on_miss"):
        on_miss = _ident_list(cursor)
        if not on_miss:
            cursor.error("E100", "expected at least one action id after 'on_miss'")
            return False
    out.append(
        KpiSpec(
            id=kid.value,
            name=name.value,
            csf_ref=csf_ref.value,
            expression=expression,
            target=Target(cmp_tok.value, threshold, unit_tok.value),
            concern_refs=tuple(concerns),
            action_refs=tuple(on_miss),
            location=kid.location,
        )
    )
    return True


def _action(cursor: TokenCursor, out: list[ActionSpec]) -> bool:
    aid = cursor.expect_ident("action id")
    description = cursor.expect_string("action description")
    if aid is None or description is None:
        return False
    concerns: list[str] = []
    if cursor.accept("ident", "concerns"):
        concerns = _ident_list(cursor)
        if not concerns:
            cursor.error("E100", "expected at least one concern id after 'concerns'")
            return False
    out.append(ActionSpec(aid.value, description.value, tuple(concerns), location=aid.location))
    return True
