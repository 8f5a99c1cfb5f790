"""Parser for the .arch.saf architecture-description DSL.

Grammar:

    arch      := "architecture" ID "{" item* "}"
    item      := element | decision | represents
    element   := "element" ID STRING "kind" ID
    decision  := "decision" ID STRING ("options" STRING ("|" STRING)*)?
                 ("chosen" NUMBER)? ("pertains_to" ID+)? ("characterized_by" ID+)?
    represents := "represents" FEATURE_ID DECISION_ID
"""

from __future__ import annotations

from ..archtrace import ArchitectureDescription, ArchitectureElement, DesignDecision
from ..diagnostics import ParseResult, diagnostic
from ._lexer import TokenCursor, tokenize

ITEM_KEYWORDS = {"element", "decision", "represents"}


def parse_arch(text: str, file: str = "<arch>") -> ParseResult:
    lexed = tokenize(text, file)
    if lexed.diagnostics:
        return ParseResult(None, lexed.diagnostics)
    cursor = TokenCursor(lexed.tokens)
    arch = _document(cursor)
    if any(d.is_error for d in cursor.diagnostics):
        return ParseResult(None, cursor.diagnostics)
    return ParseResult(arch, cursor.diagnostics)


def _document(cursor: TokenCursor) -> ArchitectureDescription | None:
    header = cursor.expect("ident", "architecture", what="'architecture'")
    if header is None:
        return None
    doc_id = cursor.expect_ident("architecture id")
    if doc_id is None or cursor.expect("punct", "{") is None:
        return None

    elements: list[ArchitectureElement] = []
    decisions: list[DesignDecision] = []
    represents: dict = {}

    while not cursor.at_end() and not cursor.check("punct", "}"):
        tok = cursor.current
        if tok.kind != "ident":
            cursor.error("E100", f"expected an architecture item, found {tok.value or tok.kind!r}")
            cursor.skip_to_keywords(ITEM_KEYWORDS)
            continue
        if tok.value not in ITEM_KEYWORDS:
            cursor.error("E101", f"unknown keyword {tok.value!r}", tok.location)
            cursor.advance()
            cursor.skip_to_keywords(ITEM_KEYWORDS)
            continue
        keyword = cursor.advance().value
        ok = True
        if keyword == "element":
            ok = _element(cursor, elements)
        elif keyword == "decision":
            ok = _decision(cursor, decisions)
        elif keyword == "represents":
            ok = _represents(cursor, represents)
        if not ok:
            cursor.skip_to_keywords(ITEM_KEYWORDS)

    if cursor.expect("punct", "}") is None:
        return None
    if not cursor.at_end():
        cursor.error("E100", f"unexpected trailing input {cursor.current.value!r}")
        return None

    for items, kind in ((elements, "element"), (decisions, "decision")):
        ids = [item.id for item in items]
        for item in items:
            if ids.count(item.id) > 1:
                cursor.error("E002", f"duplicate {kind} identifier {item.id!r}", item.location)
                return None

    return ArchitectureDescription(
        id=doc_id.value,
        elements=tuple(elements),
        decisions=tuple(decisions),
        represents=represents,
        location=header.location,
    )


def _element(cursor: TokenCursor, out: list[ArchitectureElement]) -> bool:
    eid = cursor.expect_ident("element id")
    name = cursor.expect_string("element name")
    if eid is None or name is None:
        return False
    if cursor.expect("ident", "kind", what="'kind'") is None:
        return False
    kind = cursor.expect_ident("element kind")
    if kind is None:
        return False
    out.append(ArchitectureElement(eid.value, name.value, kind.value, location=eid.location))
    return True


def _ident_list(cursor: TokenCursor) -> list[str]:
    stop = ITEM_KEYWORDS | {"pertains_to", "characterized_by", "chosen", "options"}
    values: list[str] = []
    while cursor.check("ident") and cursor.current.value not in stop:
        values.append(cursor.advance().value)
    return values


def _decision(cursor: TokenCursor, out: list[DesignDecision]) -> bool:
    did = cursor.expect_ident("decision id")
    statement = cursor.expect_string("decision statement")
    if did is None or statement is None:
        return False
    options: list[str] = []
    if cursor.accept("ident", "options"):
        first = cursor.expect_string("option text")
        if first is None:
            return False
        options.append(first.value)
        while cursor.accept("punct", "|"):
            nxt = cursor.expect_string("option text")
            if nxt is None:
                return False
            options.append(nxt.value)
    chosen: int | None = None
    if cursor.accept("ident", "chosen"):
        num = cursor.expect("number", what="chosen option index")
        if num is None:
            return False
        try:
            chosen = int(num.value)
        except ValueError:
            cursor.error("E100", f"malformed option index {num.value!r}", num.location)
            return False
        if not 0 <= chosen < len(options):
            cursor.error(
                "E102",
                f"chosen option index {chosen} out of range ({len(options)} options)",
                num.location,
            )
            return False
    pertains: list[str] = []
    characterized: list[str] = []
    if cursor.accept("ident", "pertains_to"):
        pertains = _ident_list(cursor)
        if not pertains:
            cursor.error("E100", "expected at least one concern id after 'pertains_to'")
            return False
    if cursor.accept("ident", "characterized_by"):
        characterized = _ident_list(cursor)
        if not characterized:
            cursor.error("E100", "expected at least one concern id after 'characterized_by'")
            return False
    out.append(
        DesignDecision(
            id=did.value,
            statement=statement.value,
            options=tuple(options),
            chosen=chosen,
            pertains_to=tuple(pertains),
            characterized_by=tuple(characterized),
            location=did.location,
        )
    )
    return True


def _represents(cursor: TokenCursor, represents: dict) -> bool:
    feature = cursor.expect_ident("feature id")
    decision = cursor.expect_ident("decision id")
    if feature is None or decision is None:
        return False
    if feature.value in represents:
        cursor.error("E002", f"duplicate represents mapping for feature {feature.value!r}", feature.location)
        return False
    represents[feature.value] = decision.value
    return True
