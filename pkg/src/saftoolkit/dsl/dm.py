"""Parser for the .dm.saf decision-map DSL.

Grammar:

    dm      := "decision_map" ID STRING "system" STRING "{" item* "}"
    item    := feature | qa | req | effect | goal | meta
    feature := "feature" ID STRING body?
    body    := "{" ("description" STRING)? ("variant" ID STRING)* ("realized_by" ID+)? "}"
    qa      := "qa" ID STRING "dimension" DIM "impact" LEVEL ("description" STRING)?
    req     := "requirement" ID STRING "dimension" DIM "impact" LEVEL ("description" STRING)?
    effect  := "effect" REF "->" ID EFFECTTYPE ("label" STRING)?
    goal    := "goal" ID STRING ("concerns" ID+)?
    meta    := "meta" STRING STRING
    REF     := ID | ID "." ID            (feature.variant)
"""

from __future__ import annotations

from ..diagnostics import ParseResult
from ..model import (
    Concern,
    ConcernKind,
    DecisionMap,
    Dimension,
    Effect,
    EffectType,
    Feature,
    ImpactLevel,
    SustainabilityGoal,
    Variant,
)
from ._lexer import Token, TokenCursor, tokenize

ITEM_KEYWORDS = {"feature", "qa", "requirement", "effect", "goal", "meta"}


def parse_dm(text: str, file: str = "<dm>") -> ParseResult:
    """Parse decision-map text; the document is present iff no error occurred."""
    lexed = tokenize(text, file)
    if lexed.diagnostics:
        return ParseResult(None, lexed.diagnostics)
    cursor = TokenCursor(lexed.tokens)
    dm = _document(cursor)
    diagnostics = cursor.diagnostics
    if any(d.is_error for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(dm, diagnostics)


def _enum_token(cursor: TokenCursor, converter, what: str) -> object | None:
    tok = cursor.current
    if tok.kind != "ident":
        cursor.error("E100", f"expected {what}, found {tok.value or tok.kind!r}")
        return None
    try:
        value = converter(tok.value)
    except ValueError:
        cursor.error("E102", f"{what} out of range: {tok.value!r}", tok.location)
        cursor.advance()
        return None
    cursor.advance()
    return value


def _ident_list(cursor: TokenCursor) -> list[Token]:
    idents: list[Token] = []
    while cursor.check("ident") and cursor.current.value not in ITEM_KEYWORDS:
        idents.append(cursor.advance())
    return idents


def _document(cursor: TokenCursor) -> DecisionMap | None:
    header = cursor.expect("ident", "decision_map", what="'decision_map'")
    if header is None:
        return None
    doc_id = cursor.expect_ident("decision map id")
    title = cursor.expect_string("decision map title")
    if cursor.expect("ident", "system", what="'system'") is None:
        return None
    system = cursor.expect_string("system name")
    if doc_id is None or title is None or system is None:
        return None
    if cursor.expect("punct", "{") is None:
        return None

    concerns: list[Concern] = []
    features: list[Feature] = []
    effects: list[Effect] = []
    goals: list[SustainabilityGoal] = []
    metadata: dict = {}

    while not cursor.at_end() and not cursor.check("punct", "}"):
        tok = cursor.current
        if tok.kind != "ident":
            cursor.error("E100", f"expected a decision map item, found {tok.value or tok.kind!r}")
            cursor.skip_to_keywords(ITEM_KEYWORDS)
            continue
        if tok.value not in ITEM_KEYWORDS:
            cursor.error("E101", f"unknown keyword {tok.value!r}", tok.location)
            cursor.advance()
            cursor.skip_to_keywords(ITEM_KEYWORDS)
            continue
        keyword = cursor.advance().value
        ok = True
        if keyword == "feature":
            ok = _feature(cursor, features)
        elif keyword in ("qa", "requirement"):
            ok = _concern(cursor, keyword, concerns)
        elif keyword == "effect":
            ok = _effect(cursor, effects)
        elif keyword == "goal":
            ok = _goal(cursor, goals)
        elif keyword == "meta":
            ok = _meta(cursor, metadata)
        if not ok:
            cursor.skip_to_keywords(ITEM_KEYWORDS)

    if cursor.expect("punct", "}") is None:
        return None
    if not cursor.at_end():
        cursor.error("E100", f"unexpected trailing input {cursor.current.value!r}")
        return None

    return DecisionMap(
        id=doc_id.value,
        title=title.value,
        system_name=system.value,
        concerns=tuple(concerns),
        features=tuple(features),
        effects=tuple(effects),
        goals=tuple(goals),
        metadata=metadata,
        location=header.location,
    )


def _feature(cursor: TokenCursor, out: list[Feature]) -> bool:
    fid = cursor.expect_ident("feature id")
    name = cursor.expect_string("feature name")
    if fid is None or name is None:
        return False
    description: str | None = None
    variants: list[Variant] = []
    realized_by: list[str] = []
    if cursor.accept("punct", "{"):
        if cursor.accept("ident", "description"):
            desc = cursor.expect_string("feature description")
            if desc is None:
                return False
            description = desc.value
        while cursor.accept("ident", "variant"):
            vid = cursor.expect_ident("variant id")
            vname = cursor.expect_string("variant name")
            if vid is None or vname is None:
                return False
            variants.append(Variant(vid.value, vname.value, location=vid.location))
        if cursor.accept("ident", "realized_by"):
            elements = _ident_list(cursor)
            if not elements:
                cursor.error("E100", "expected at least one element id after 'realized_by'")
                return False
            realized_by = [t.value for t in elements]
        if cursor.expect("punct", "}") is None:
            return False
    out.append(
        Feature(
            id=fid.value,
            name=name.value,
            description=description,
            variants=tuple(variants),
            realized_by=tuple(realized_by),
            location=fid.location,
        )
    )
    return True


def _concern(cursor: TokenCursor, keyword: str, out: list[Concern]) -> bool:
    cid = cursor.expect_ident("concern id")
    name = cursor.expect_string("concern name")
    if cid is None or name is None:
        return False
    if cursor.expect("ident", "dimension", what="'dimension'") is None:
        return False
    dimension = _enum_token(cursor, Dimension.from_text, "dimension")
    if dimension is None:
        return False
    if cursor.expect("ident", "impact", what="'impact'") is None:
        return False
    impact = _enum_token(cursor, ImpactLevel.from_text, "impact level")
    if impact is None:
        return False
    description: str | None = None
    if cursor.accept("ident", "description"):
        desc = cursor.expect_string("concern description")
        if desc is None:
            return False
        description = desc.value
    kind = ConcernKind.QUALITY_ATTRIBUTE if keyword == "qa" else ConcernKind.SUSTAINABILITY_REQUIREMENT
    out.append(
        Concern(
            id=cid.value,
            name=name.value,
            kind=kind,
            dimension=dimension,
            impact=impact,
            description=description,
            location=cid.location,
        )
    )
    return True


def _effect(cursor: TokenCursor, out: list[Effect]) -> bool:
    source = cursor.expect_ident("effect source")
    if source is None:
        return False
    source_ref = source.value
    if cursor.accept("punct", "."):
        variant = cursor.expect_ident("variant id")
        if variant is None:
            return False
        source_ref = f"{source.value}.{variant.value}"
    if cursor.expect("punct", "->") is None:
        return False
    target = cursor.expect_ident("effect target")
    if target is None:
        return False
    effect_type = _enum_token(cursor, EffectType.from_text, "effect type")
    if effect_type is None:
        return False
    label: str | None = None
    if cursor.accept("ident", "label"):
        text = cursor.expect_string("effect label")
        if text is None:
            return False
        label = text.value
    if source_ref == target.value:
        cursor.error(
            "E100",
            f"effect source and target must differ: {source_ref!r}",
            source.location,
        )
        return False
    out.append(
        Effect(
            source=source_ref,
            target=target.value,
            effect_type=effect_type,
            impact_label=label,
            location=source.location,
        )
    )
    return True


def _goal(cursor: TokenCursor, out: list[SustainabilityGoal]) -> bool:
    gid = cursor.expect_ident("goal id")
    statement = cursor.expect_string("goal statement")
    if gid is None or statement is None:
        return False
    linked: list[str] = []
    if cursor.accept("ident", "concerns"):
        idents = _ident_list(cursor)
        if not idents:
            cursor.error("E100", "expected at least one concern id after 'concerns'")
            return False
        linked = [t.value for t in idents]
    out.append(
        SustainabilityGoal(
            id=gid.value,
            statement=statement.value,
            linked_concerns=tuple(linked),
            location=gid.location,
        )
    )
    return True


def _meta(cursor: TokenCursor, metadata: dict) -> bool:
    key = cursor.expect_string("metadata key")
    value = cursor.expect_string("metadata value")
    if key is None or value is None:
        return False
    metadata[key.value] = value.value
    return True
