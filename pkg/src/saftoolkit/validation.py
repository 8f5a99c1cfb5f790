"""Rule engine over a resolved workspace: structural errors, matrix
consistency warnings, and style lints.

Catalog:
    E003 concern dimension/impact missing or invalid (programmatic construction)
    E004 effect targets a feature
    W101 matrix conflict: decided effect contradicts a matrix cell's sign
    W102 downward time flow: effect from a higher to a strictly lower impact level
    W103 isolated element: concern or feature with no incident effect
    I201 undecided effect has a decided matrix cell available (resolution hint)
    I202 matrix cell is I for a decided effect (context-dependence note)
    I203 SQ entry spanning more than one dimension
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, diagnostic, sort_diagnostics
from .model import (
    DecisionMap,
    DependencyValue,
    Dimension,
    EffectType,
    ImpactLevel,
)
from .workspace import Workspace

ALL_RULES = ("E003", "E004", "W101", "W102", "W103", "I201", "I202", "I203")

_OPPOSITE = {
    EffectType.POSITIVE: DependencyValue.MINUS,
    EffectType.NEGATIVE: DependencyValue.PLUS,
}


@dataclass(frozen=True)
class ValidationConfig:
    """Lint toggles; disabling a code removes exactly that code's diagnostics."""

    disabled: frozenset = frozenset()

    def enabled(self, code: str) -> bool:
        return code not in self.disabled


def validate(ws: Workspace, config: ValidationConfig | None = None) -> list[Diagnostic]:
    """Pure and deterministic; diagnostics sorted by (file, line, code)."""
    config = config or ValidationConfig()
    out: list[Diagnostic] = []

    def emit(code: str, message: str, location=None, element=None, related=()) -> None:
        if config.enabled(code):
            out.append(diagnostic(code, message, location, element, tuple(related)))

    for dm in ws.decision_maps:
        _check_dm(ws, dm, emit)
    for sq in ws.sq_models:
        for entry in sq.entries:
            if len(entry.dimensions) > 1:
                dims = ", ".join(sorted(d.value for d in entry.dimensions))
                emit(
                    "I203",
                    f"SQ entry {entry.qa_id!r} spans more than one dimension ({dims})",
                    entry.location,
                    entry.qa_id,
                )
    return sort_diagnostics(out)


def _check_dm(ws: Workspace, dm: DecisionMap, emit) -> None:
    concerns = {c.id: c for c in dm.concerns}
    features = {f.id: f for f in dm.features}

    for concern in dm.concerns:
        if not isinstance(concern.dimension, Dimension) or not isinstance(
            concern.impact, ImpactLevel
        ):
            emit(
                "E003",
                f"concern {concern.id!r} has a missing or invalid dimension/impact",
                concern.location,
                concern.id,
            )

    touched: set[str] = set()
    for effect in dm.effects:
        touched.add(effect.source.split(".", 1)[0])
        touched.add(effect.target)

        if effect.target not in concerns and effect.target in features:
            emit(
                "E004",
                f"effect {effect.source} -> {effect.target} targets a feature"
                " (effects terminate on concerns)",
                effect.location,
                related=(effect.source, effect.target),
            )
            continue

        source_concern = None
        if "." not in effect.source and effect.source in concerns:
            source_concern = concerns[effect.source]
        target_concern = concerns.get(effect.target)

        if source_concern is not None and target_concern is not None:
            if source_concern.impact > target_concern.impact:
                emit(
                    "W102",
                    f"effect {effect.source} -> {effect.target} flows from"
                    f" {source_concern.impact.value} down to {target_concern.impact.value}",
                    effect.location,
                    related=(effect.source, effect.target),
                )
            _check_against_matrices(ws.matrices, effect, emit)

    for concern in dm.concerns:
        if concern.id not in touched:
            emit(
                "W103",
                f"concern {concern.id!r} has no incident effect",
                concern.location,
                concern.id,
            )
    for feature in dm.features:
        if feature.id not in touched:
            emit(
                "W103",
                f"feature {feature.id!r} has no incident effect",
                feature.location,
                feature.id,
            )


def _check_against_matrices(matrices, effect, emit) -> None:
    """Matrix checks use only the row -> column orientation of each matrix."""
    for matrix in matrices:
        cell = matrix.cells.get((effect.source, effect.target))
        if cell is None:
            continue
        pair = (effect.source, effect.target, matrix.id)
        if effect.effect_type is EffectType.UNDECIDED:
            if cell is not DependencyValue.INDETERMINATE:
                emit(
                    "I201",
                    f"undecided effect {effect.source} -> {effect.target} has matrix"
                    f" cell '{cell.value}' in {matrix.id} (resolution hint)",
                    effect.location,
                    related=pair,
                )
        elif cell is DependencyValue.INDETERMINATE:
            emit(
                "I202",
                f"matrix {matrix.id} holds 'I' for decided effect"
                f" {effect.source} -> {effect.target} (context-dependent)",
                effect.location,
                related=pair,
            )
        elif cell is _OPPOSITE[effect.effect_type]:
            emit(
                "W101",
                f"effect {effect.source} -> {effect.target} is {effect.effect_type.value}"
                f" but matrix {matrix.id} cell ({effect.source}, {effect.target})"
                f" holds '{cell.value}'",
                effect.location,
                related=pair,
            )


@dataclass(frozen=True)
class ConsistencySummary:
    conflicts: int
    hints: int
    coverage: float

    def to_json(self) -> dict:
        return {"conflicts": self.conflicts, "hints": self.hints, "coverage": self.coverage}


def consistency_summary(ws: Workspace, config: ValidationConfig | None = None) -> ConsistencySummary:
    """Counts from validate plus matrix coverage of the map's effect pairs.

    Coverage is the fraction of concern-to-concern effect pairs that have a
    cell in some loaded matrix; 0.0 when the maps model no such pairs.
    """
    diags = validate(ws, config)
    conflicts = sum(1 for d in diags if d.code == "W101")
    hints = sum(1 for d in diags if d.code == "I201")

    pairs: set[tuple[str, str]] = set()
    for dm in ws.decision_maps:
        concern_ids = dm.concern_ids()
        for effect in dm.effects:
            if effect.source in concern_ids and effect.target in concern_ids:
                pairs.add((effect.source, effect.target))
    if not pairs:
        return ConsistencySummary(conflicts, hints, 0.0)
    covered = sum(
        1 for pair in pairs if any(pair in matrix.cells for matrix in ws.matrices)
    )
    return ConsistencySummary(conflicts, hints, covered / len(pairs))


def exit_code_for(diagnostics: list[Diagnostic], strict: bool = False) -> int:
    """CLI mapping: errors -> 2, warnings -> 1 under strict else 0, clean -> 0."""
    if any(d.severity == "error" for d in diagnostics):
        return 2
    if strict and any(d.severity == "warning" for d in diagnostics):
        return 1
    return 0
