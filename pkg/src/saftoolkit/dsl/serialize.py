"""Canonical serialization of every document kind.

serialize is a pure function; canonical form is applied first, so
parse(serialize(d)) structurally equals the canonical form of d and
identical inputs yield byte-identical output (UTF-8, \\n line endings).
"""

from __future__ import annotations

from ..archtrace import ArchitectureDescription, canonicalize_arch
from ..kpi import KpiDocument, canonicalize_kpi_document, format_number
from ..model import (
    DecisionMap,
    DependencyMatrix,
    SQModel,
    canonicalize,
    canonicalize_matrix,
    canonicalize_sq,
)
from .sq import HEADER

_STRING_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


def quote(text: str) -> str:
    return '"' + "".join(_STRING_ESCAPES.get(ch, ch) for ch in text) + '"'


def serialize(document) -> str:
    """Dispatch on document type; returns canonical text."""
    if isinstance(document, DecisionMap):
        return serialize_dm(document)
    if isinstance(document, SQModel):
        return serialize_sq(document)
    if isinstance(document, DependencyMatrix):
        return serialize_matrix(document)
    if isinstance(document, KpiDocument):
        return serialize_kpi_document(document)
    if isinstance(document, ArchitectureDescription):
        return serialize_arch(document)
    raise TypeError(f"cannot serialize {type(document).__name__}")


def serialize_dm(dm: DecisionMap) -> str:
    dm = canonicalize(dm)
    lines = [f"decision_map {dm.id} {quote(dm.title)} system {quote(dm.system_name)} {{"]
    for key, value in dm.metadata.items():
        lines.append(f"  meta {quote(key)} {quote(value)}")
    for feature in dm.features:
        head = f"  feature {feature.id} {quote(feature.name)}"
        if feature.description is None and not feature.variants and not feature.realized_by:
            lines.append(head)
            continue
        lines.append(head + " {")
        if feature.description is not None:
            lines.append(f"    description {quote(feature.description)}")
        for variant in feature.variants:
            lines.append(f"    variant {variant.id} {quote(variant.name)}")
        if feature.realized_by:
            lines.append("    realized_by " + " ".join(feature.realized_by))
        lines.append("  }")
    for concern in dm.concerns:
        keyword = "qa" if concern.kind.value == "quality_attribute" else "requirement"
        line = (
            f"  {keyword} {concern.id} {quote(concern.name)}"
            f" dimension {concern.dimension.value} impact {concern.impact.value}"
        )
        if concern.description is not None:
            line += f" description {quote(concern.description)}"
        lines.append(line)
    for effect in dm.effects:
        line = f"  effect {effect.source} -> {effect.target} {effect.effect_type.value}"
        if effect.impact_label is not None:
            line += f" label {quote(effect.impact_label)}"
        lines.append(line)
    for goal in dm.goals:
        line = f"  goal {goal.id} {quote(goal.statement)}"
        if goal.linked_concerns:
            line += " concerns " + " ".join(goal.linked_concerns)
        lines.append(line)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def serialize_sq(model: SQModel) -> str:
    model = canonicalize_sq(model)
    lines = [f"# id: {model.id}", ",".join(HEADER)]
    for entry in model.entries:
        dims = "|".join(d.value for d in sorted(entry.dimensions, key=lambda d: d.rank))
        metrics = ";".join(
            f"{m.id}:{m.metric_kind.value}:{m.unit}"
            + (f':"{m.description}"' if m.description is not None else "")
            for m in entry.metrics
        )
        row = [entry.qa_id, entry.name, entry.definition, entry.source_ref, dims, metrics]
        lines.append(",".join(_csv_field(field) for field in row))
    return "\n".join(lines) + "\n"


def serialize_matrix(matrix: DependencyMatrix) -> str:
    matrix = canonicalize_matrix(matrix)
    lines = [
        f"# id: {matrix.id}",
        f"# dims: {matrix.row_dimension.value} x {matrix.col_dimension.value}",
    ]
    if matrix.rows or matrix.cols:
        lines.append("," + ",".join(matrix.cols))
        for row_qa in matrix.rows:
            cells = [matrix.cells.get((row_qa, col_qa)) for col_qa in matrix.cols]
            lines.append(row_qa + "," + ",".join(c.value if c else "" for c in cells))
    return "\n".join(lines) + "\n"


def serialize_kpi_document(doc: KpiDocument) -> str:
    doc = canonicalize_kpi_document(doc)
    lines = [f"# id: {doc.id}"]
    for goal in doc.goals:
        line = f"goal {goal.id} {quote(goal.statement)}"
        if goal.sustainability_goal_ref is not None:
            line += f" sustainability_goal {goal.sustainability_goal_ref}"
        lines.append(line)
    for csf in doc.csfs:
        lines.append(f"csf {csf.id} {quote(csf.statement)} goal {csf.goal_ref}")
    for kpi in doc.kpis:
        line = (
            f"kpi {kpi.id} {quote(kpi.name)} csf {kpi.csf_ref}"
            f" expr {quote(kpi.expression.render())}"
            f" target {kpi.target.comparator} {format_number(kpi.target.threshold)}"
            f" unit {quote(kpi.target.unit)}"
            f" concerns " + " ".join(kpi.concern_refs)
        )
        if kpi.action_refs:
            line += " on_miss " + " ".join(kpi.action_refs)
        lines.append(line)
    for action in doc.actions:
        line = f"action {action.id} {quote(action.description)}"
        if action.concern_refs:
            line += " concerns " + " ".join(action.concern_refs)
        lines.append(line)
    return "\n".join(lines) + "\n"


def serialize_arch(arch: ArchitectureDescription) -> str:
    arch = canonicalize_arch(arch)
    lines = [f"architecture {arch.id} {{"]
    for element in arch.elements:
        lines.append(f"  element {element.id} {quote(element.name)} kind {element.kind}")
    for decision in arch.decisions:
        line = f"  decision {decision.id} {quote(decision.statement)}"
        if decision.options:
            line += " options " + " | ".join(quote(o) for o in decision.options)
        if decision.chosen is not None:
            line += f" chosen {decision.chosen}"
        if decision.pertains_to:
            line += " pertains_to " + " ".join(decision.pertains_to)
        if decision.characterized_by:
            line += " characterized_by " + " ".join(decision.characterized_by)
        lines.append(line)
    for feature_id, decision_id in arch.represents.items():
        lines.append(f"  represents {feature_id} {decision_id}")
    lines.append("}")
    return "\n".join(lines) + "\n"
