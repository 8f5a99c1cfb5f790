"""Architecture descriptions (elements, design decisions) and traceability.

Trace relations are exactly the typed edges declared in the models:
kpi -> metric -> quality attribute / concern -> decision -> feature -> element.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from .diagnostics import SafError, SourceLocation

if TYPE_CHECKING:
    from .workspace import Workspace

ELEMENT_KINDS = ("software_service", "component")


@dataclass(frozen=True)
class ArchitectureElement:
    """Concrete part of the architecture; kind is software_service, component,
    or any other label."""

    id: str
    name: str
    kind: str = "component"
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class DesignDecision:
    id: str
    statement: str
    options: tuple[str, ...] = ()
    chosen: int | None = None
    pertains_to: tuple[str, ...] = ()
    characterized_by: tuple[str, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)

    def concern_ids(self) -> tuple[str, ...]:
        return self.pertains_to + self.characterized_by


@dataclass(frozen=True)
class ArchitectureDescription:
    id: str
    elements: tuple[ArchitectureElement, ...] = ()
    decisions: tuple[DesignDecision, ...] = ()
    represents: dict = field(default_factory=dict)  # feature id -> decision id
    location: SourceLocation | None = field(default=None, compare=False)

    def element(self, element_id: str) -> ArchitectureElement | None:
        for e in self.elements:
            if e.id == element_id:
                return e
        return None

    def decision(self, decision_id: str) -> DesignDecision | None:
        for d in self.decisions:
            if d.id == decision_id:
                return d
        return None


def canonicalize_arch(arch: ArchitectureDescription) -> ArchitectureDescription:
    return ArchitectureDescription(
        id=arch.id,
        elements=tuple(sorted(arch.elements, key=lambda e: e.id)),
        decisions=tuple(
            replace(
                d,
                pertains_to=tuple(sorted(d.pertains_to)),
                characterized_by=tuple(sorted(d.characterized_by)),
            )
            for d in sorted(arch.decisions, key=lambda d: d.id)
        ),
        represents=dict(sorted(arch.represents.items())),
        location=arch.location,
    )


@dataclass(frozen=True)
class TraceEdge:
    source: str
    target: str
    relation: str


@dataclass(frozen=True)
class TraceResult:
    kpi_id: str
    metrics: tuple[str, ...]
    concerns: tuple[str, ...]
    decisions: tuple[str, ...]
    features: tuple[str, ...]
    elements: tuple[str, ...]
    edges: tuple[TraceEdge, ...]

    def to_json(self) -> dict:
        return {
            "kpi_id": self.kpi_id,
            "metrics": list(self.metrics),
            "concerns": list(self.concerns),
            "decisions": list(self.decisions),
            "features": list(self.features),
            "elements": list(self.elements),
            "edges": [
                {"from": e.source, "to": e.target, "relation": e.relation} for e in self.edges
            ],
        }


@dataclass(frozen=True)
class ElementImpacts:
    element_id: str
    features: tuple[str, ...]
    decisions: tuple[str, ...]
    concerns: tuple[str, ...]
    kpis: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "element_id": self.element_id,
            "features": list(self.features),
            "decisions": list(self.decisions),
            "concerns": list(self.concerns),
            "kpis": list(self.kpis),
        }


def _kpi_concern_ids(ws: Workspace, kpi) -> set[str]:
    """DM concerns linked to a KPI: its concern_refs plus the qa_ids of the SQ
    entries owning its metrics, restricted to concerns declared in some DM."""
    dm_concerns = ws.concern_ids()
    linked = {c for c in kpi.concern_refs if c in dm_concerns}
    for metric_id in kpi.expression.metrics():
        owner = ws.metric_owner(metric_id)
        if owner is not None and owner.qa_id in dm_concerns:
            linked.add(owner.qa_id)
    return linked


def trace_kpi(ws: Workspace, kpi_id: str) -> TraceResult:
    """Walk kpi -> metrics -> SQ entries -> concerns -> decisions -> features
    -> elements, collecting the typed edges along the way."""
    kpi = ws.find_kpi(kpi_id)
    if kpi is None:
        raise SafError("E501", f"unknown KPI {kpi_id!r}")

    edges: list[TraceEdge] = []
    metrics = kpi.expression.metrics()
    concerns: set[str] = set()
    dm_concerns = ws.concern_ids()
    for metric_id in metrics:
        edges.append(TraceEdge(kpi_id, metric_id, "uses_metric"))
        owner = ws.metric_owner(metric_id)
        if owner is not None and owner.qa_id in dm_concerns:
            concerns.add(owner.qa_id)
            edges.append(TraceEdge(metric_id, owner.qa_id, "measures_qa"))
    for concern_id in kpi.concern_refs:
        if concern_id in dm_concerns:
            concerns.add(concern_id)
            edges.append(TraceEdge(kpi_id, concern_id, "represents_qr"))

    decisions: set[str] = set()
    features: set[str] = set()
    elements: set[str] = set()
    for arch in ws.architecture_descriptions:
        for decision in arch.decisions:
            touched = sorted(set(decision.concern_ids()) & concerns)
            if not touched:
                continue
            decisions.add(decision.id)
            for concern_id in touched:
                edges.append(TraceEdge(concern_id, decision.id, "concern_of"))
        for feature_id, decision_id in arch.represents.items():
            if decision_id not in decisions:
                continue
            features.add(feature_id)
            edges.append(TraceEdge(decision_id, feature_id, "represented_by"))
    for dm in ws.decision_maps:
        for feature in dm.features:
            if feature.id not in features:
                continue
            for element_id in feature.realized_by:
                elements.add(element_id)
                edges.append(TraceEdge(feature.id, element_id, "realized_by"))

    return TraceResult(
        kpi_id=kpi_id,
        metrics=metrics,
        concerns=tuple(sorted(concerns)),
        decisions=tuple(sorted(decisions)),
        features=tuple(sorted(features)),
        elements=tuple(sorted(elements)),
        edges=tuple(sorted(set(edges), key=lambda e: (e.relation, e.source, e.target))),
    )


def impacts_of_element(ws: Workspace, element_id: str) -> ElementImpacts:
    """Reverse traversal of the same relations, from one architecture element."""
    if ws.find_element(element_id) is None:
        raise SafError("E501", f"unknown architecture element {element_id!r}")

    features: set[str] = set()
    for dm in ws.decision_maps:
        for feature in dm.features:
            if element_id in feature.realized_by:
                features.add(feature.id)

    decisions: set[str] = set()
    concerns: set[str] = set()
    for arch in ws.architecture_descriptions:
        for feature_id, decision_id in arch.represents.items():
            if feature_id not in features:
                continue
            decision = arch.decision(decision_id)
            if decision is None:
                continue
            decisions.add(decision.id)
            concerns.update(decision.concern_ids())

    kpis: set[str] = set()
    for kpi in ws.all_kpis():
        if _kpi_concern_ids(ws, kpi) & concerns:
            kpis.add(kpi.id)

    return ElementImpacts(
        element_id=element_id,
        features=tuple(sorted(features)),
        decisions=tuple(sorted(decisions)),
        concerns=tuple(sorted(concerns)),
        kpis=tuple(sorted(kpis)),
    )
