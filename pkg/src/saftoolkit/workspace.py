"""Workspace resolution: binds a set of parsed documents into one symbol table.

A Workspace is only constructed when zero error-severity unresolved references
remain; otherwise the full list of resolution diagnostics is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .archtrace import ArchitectureDescription, ArchitectureElement
from .diagnostics import Diagnostic, SourceLocation, diagnostic, sort_diagnostics
from .kpi import KpiDocument, KpiSpec
from .model import DecisionMap, DependencyMatrix, SQEntry, SQModel

Document = object  # DecisionMap | SQModel | DependencyMatrix | KpiDocument | ArchitectureDescription


@dataclass(frozen=True)
class Workspace:
    decision_maps: tuple[DecisionMap, ...] = ()
    sq_models: tuple[SQModel, ...] = ()
    matrices: tuple[DependencyMatrix, ...] = ()
    kpi_documents: tuple[KpiDocument, ...] = ()
    architecture_descriptions: tuple[ArchitectureDescription, ...] = ()
    symbols: dict = field(default_factory=dict)  # (kind, id) -> element

    def concern_ids(self) -> set[str]:
        return {c.id for dm in self.decision_maps for c in dm.concerns}

    def metric_specs(self) -> dict:
        """metric id -> MetricSpec across all SQ models."""
        return {
            m.id: m for sq in self.sq_models for e in sq.entries for m in e.metrics
        }

    def metric_owner(self, metric_id: str) -> SQEntry | None:
        for sq in self.sq_models:
            for entry in sq.entries:
                for metric in entry.metrics:
                    if metric.id == metric_id:
                        return entry
        return None

    def all_kpis(self) -> list[KpiSpec]:
        return sorted(
            (k for doc in self.kpi_documents for k in doc.kpis), key=lambda k: k.id
        )

    def find_kpi(self, kpi_id: str) -> KpiSpec | None:
        for doc in self.kpi_documents:
            kpi = doc.kpi(kpi_id)
            if kpi is not None:
                return kpi
        return None

    def find_element(self, element_id: str) -> ArchitectureElement | None:
        for arch in self.architecture_descriptions:
            element = arch.element(element_id)
            if element is not None:
                return element
        return None

    def find_document(self, kind: str, doc_id: str):
        return self.symbols.get((kind, doc_id))


@dataclass(frozen=True)
class ResolveResult:
    workspace: Workspace | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.workspace is not None


class _Resolver:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def error(
        self,
        code: str,
        message: str,
        location: SourceLocation | None = None,
        element: str | None = None,
        related: tuple[str, ...] = (),
    ) -> None:
        self.diagnostics.append(diagnostic(code, message, location, element, related))

    def unresolved(self, what: str, ref: str, owner: str, location: SourceLocation | None) -> None:
        self.error("E001", f"unresolved {what} reference {ref!r} in {owner}", location, ref)

    def check_unique(self, kind: str, items, owner: str) -> None:
        seen: dict[str, object] = {}
        for item in items:
            item_id = getattr(item, "id", None) or getattr(item, "qa_id")
            if item_id in seen:
                self.error(
                    "E002",
                    f"duplicate {kind} identifier {item_id!r} in {owner}",
                    getattr(item, "location", None),
                    item_id,
                )
            else:
                seen[item_id] = item


def resolve_workspace(documents: list[Document]) -> ResolveResult:
    """Resolve parsed documents into a Workspace, or report every failure.

    E001: unresolved reference. E002: duplicate identifier. E401: a KPI
    expression names a metric missing from every loaded SQ model.
    """
    dms: list[DecisionMap] = []
    sqs: list[SQModel] = []
    matrices: list[DependencyMatrix] = []
    kpi_docs: list[KpiDocument] = []
    archs: list[ArchitectureDescription] = []
    for doc in documents:
        if isinstance(doc, DecisionMap):
            dms.append(doc)
        elif isinstance(doc, SQModel):
            sqs.append(doc)
        elif isinstance(doc, DependencyMatrix):
            matrices.append(doc)
        elif isinstance(doc, KpiDocument):
            kpi_docs.append(doc)
        elif isinstance(doc, ArchitectureDescription):
            archs.append(doc)
        else:
            raise TypeError(f"not a workspace document: {type(doc).__name__}")

    r = _Resolver()
    for kind, docs in (
        ("dm", dms),
        ("sq", sqs),
        ("matrix", matrices),
        ("kpi", kpi_docs),
        ("arch", archs),
    ):
        r.check_unique(f"{kind} document", docs, "workspace")

    symbols: dict = {}

    def declare(kind: str, element_id: str, element) -> None:
        symbols.setdefault((kind, element_id), element)

    for kind, docs in (("dm", dms), ("sq", sqs), ("matrix", matrices), ("kpi", kpi_docs), ("arch", archs)):
        for doc in docs:
            declare(kind, doc.id, doc)

    # Declarations: decision maps.
    for dm in dms:
        owner = f"decision map {dm.id!r}"
        r.check_unique("concern", dm.concerns, owner)
        r.check_unique("feature", dm.features, owner)
        r.check_unique("goal", dm.goals, owner)
        for concern in dm.concerns:
            declare("concern", concern.id, concern)
        for feature in dm.features:
            r.check_unique("variant", feature.variants, f"feature {feature.id!r}")
            declare("feature", feature.id, feature)
            for variant in feature.variants:
                declare("variant", f"{feature.id}.{variant.id}", variant)
        for goal in dm.goals:
            declare("goal", goal.id, goal)

    # Declarations: SQ models and metrics (metric ids unique across workspace).
    metric_owners: dict[str, str] = {}
    for sq in sqs:
        owner = f"SQ model {sq.id!r}"
        r.check_unique("SQ entry", sq.entries, owner)
        for entry in sq.entries:
            declare("sq_entry", entry.qa_id, entry)
            for metric in entry.metrics:
                if metric.id in metric_owners:
                    r.error(
                        "E002",
                        f"duplicate metric identifier {metric.id!r}"
                        f" (already declared in {metric_owners[metric.id]})",
                        metric.location,
                        metric.id,
                    )
                else:
                    metric_owners[metric.id] = owner
                    declare("metric", metric.id, metric)

    # Declarations: architectures (element ids unique across the workspace,
    # since feature.realized_by references them globally).
    element_owners: dict[str, str] = {}
    for arch in archs:
        owner = f"architecture {arch.id!r}"
        r.check_unique("decision", arch.decisions, owner)
        for element in arch.elements:
            if element.id in element_owners:
                r.error(
                    "E002",
                    f"duplicate element identifier {element.id!r}"
                    f" (already declared in {element_owners[element.id]})",
                    element.location,
                    element.id,
                )
            else:
                element_owners[element.id] = owner
                declare("element", element.id, element)
        for decision in arch.decisions:
            declare("decision", decision.id, decision)

    # Declarations: KPI documents (kpi ids global; goal/csf/action ids doc-scoped).
    kpi_owners: dict[str, str] = {}
    for doc in kpi_docs:
        owner = f"KPI document {doc.id!r}"
        r.check_unique("organizational goal", doc.goals, owner)
        r.check_unique("critical success factor", doc.csfs, owner)
        r.check_unique("action", doc.actions, owner)
        for kpi in doc.kpis:
            if kpi.id in kpi_owners:
                r.error(
                    "E002",
                    f"duplicate KPI identifier {kpi.id!r}"
                    f" (already declared in {kpi_owners[kpi.id]})",
                    kpi.location,
                    kpi.id,
                )
            else:
                kpi_owners[kpi.id] = owner
                declare("kpi", kpi.id, kpi)

    # References: decision maps.
    for dm in dms:
        local_concerns = {c.id for c in dm.concerns}
        local_features = {f.id for f in dm.features}
        local_variants = {f"{f.id}.{v.id}" for f in dm.features for v in f.variants}
        owner = f"decision map {dm.id!r}"
        for effect in dm.effects:
            if "." in effect.source:
                if effect.source not in local_variants:
                    r.unresolved("variant", effect.source, owner, effect.location)
            elif effect.source not in local_concerns and effect.source not in local_features:
                r.unresolved("effect source", effect.source, owner, effect.location)
            if effect.target not in local_concerns and effect.target not in local_features:
                r.unresolved("effect target", effect.target, owner, effect.location)
        for goal in dm.goals:
            for concern_id in goal.linked_concerns:
                if concern_id not in local_concerns:
                    r.unresolved("concern", concern_id, f"goal {goal.id!r}", goal.location)
        for feature in dm.features:
            for element_id in feature.realized_by:
                if element_id not in element_owners:
                    r.unresolved(
                        "architecture element", element_id, f"feature {feature.id!r}",
                        feature.location,
                    )

    # References: KPI documents.
    dm_goal_ids = {g.id for dm in dms for g in dm.goals}
    dm_concern_ids = {c.id for dm in dms for c in dm.concerns}
    for doc in kpi_docs:
        local_goals = {g.id for g in doc.goals}
        local_csfs = {c.id for c in doc.csfs}
        local_actions = {a.id for a in doc.actions}
        for goal in doc.goals:
            ref = goal.sustainability_goal_ref
            if ref is not None and ref not in dm_goal_ids:
                r.unresolved("sustainability goal", ref, f"goal {goal.id!r}", goal.location)
        for csf in doc.csfs:
            if csf.goal_ref not in local_goals:
                r.unresolved("organizational goal", csf.goal_ref, f"csf {csf.id!r}", csf.location)
        for kpi in doc.kpis:
            if kpi.csf_ref not in local_csfs:
                r.unresolved("critical success factor", kpi.csf_ref, f"kpi {kpi.id!r}", kpi.location)
            for concern_id in kpi.concern_refs:
                if concern_id not in dm_concern_ids:
                    r.unresolved("concern", concern_id, f"kpi {kpi.id!r}", kpi.location)
            for action_id in kpi.action_refs:
                if action_id not in local_actions:
                    r.unresolved("action", action_id, f"kpi {kpi.id!r}", kpi.location)
            for metric_id in kpi.expression.metrics():
                if metric_id not in metric_owners:
                    r.error(
                        "E401",
                        f"unknown metric {metric_id!r} in expression of kpi {kpi.id!r}",
                        kpi.location,
                        metric_id,
                    )
        for action in doc.actions:
            for concern_id in action.concern_refs:
                if concern_id not in dm_concern_ids:
                    r.unresolved("concern", concern_id, f"action {action.id!r}", action.location)

    # References: architectures.
    dm_feature_ids = {f.id for dm in dms for f in dm.features}
    for arch in archs:
        local_decisions = {d.id for d in arch.decisions}
        for decision in arch.decisions:
            if decision.chosen is not None and not (0 <= decision.chosen < len(decision.options)):
                r.error(
                    "E001",
                    f"chosen option index {decision.chosen} out of range"
                    f" for decision {decision.id!r} ({len(decision.options)} options)",
                    decision.location,
                    decision.id,
                )
            for concern_id in decision.concern_ids():
                if concern_id not in dm_concern_ids:
                    r.unresolved("concern", concern_id, f"decision {decision.id!r}", decision.location)
        for feature_id, decision_id in arch.represents.items():
            if feature_id not in dm_feature_ids:
                r.unresolved("feature", feature_id, f"architecture {arch.id!r}", arch.location)
            if decision_id not in local_decisions:
                r.unresolved("decision", decision_id, f"architecture {arch.id!r}", arch.location)

    diagnostics = sort_diagnostics(r.diagnostics)
    if any(d.is_error for d in diagnostics):
        return ResolveResult(None, diagnostics)
    workspace = Workspace(
        decision_maps=tuple(dms),
        sq_models=tuple(sqs),
        matrices=tuple(matrices),
        kpi_documents=tuple(kpi_docs),
        architecture_descriptions=tuple(archs),
        symbols=symbols,
    )
    return ResolveResult(workspace, diagnostics)
