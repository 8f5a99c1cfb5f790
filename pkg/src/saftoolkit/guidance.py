"""Creation-guidance engines: the checklist, the impact-level decision graph,
and dependency-matrix-driven effect suggestions.

Both instruments are data-driven: specs load from INI-style key/value files
(see configs/decision_graph.conf and configs/checklist.conf) and defaults
ship in code.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

from .diagnostics import SafError
from .model import DecisionMap, DependencyMatrix, DependencyValue, Dimension, EffectType, ImpactLevel

if TYPE_CHECKING:
    from .workspace import Workspace

ANSWERS = ("yes", "no")

LEAF_NAMES = {level.value for level in ImpactLevel}


class GuidanceConfigError(SafError):
    def __init__(self, message: str):
        super().__init__("E100", message)


# --- Decision graph ----------------------------------------------------------


@dataclass(frozen=True)
class DecisionGraphSpec:
    """Rooted binary DAG; edge targets are node ids or impact-level leaves."""

    root: str
    nodes: dict  # node id -> question
    edges: dict  # (node id, "yes"|"no") -> node id or leaf name

    def question(self, node_id: str) -> str:
        return self.nodes[node_id]


def validate_graph(spec: DecisionGraphSpec) -> list[str]:
    """Load-time structural checks: missing edges, cycles, unreachable nodes."""
    problems: list[str] = []
    if spec.root not in spec.nodes:
        problems.append(f"root {spec.root!r} is not a declared node")
    for node_id in spec.nodes:
        if node_id in LEAF_NAMES:
            problems.append(f"node id {node_id!r} collides with a leaf name")
        for answer in ANSWERS:
            target = spec.edges.get((node_id, answer))
            if target is None:
                problems.append(f"node {node_id!r} is missing its {answer}-edge")
            elif target not in spec.nodes and target not in LEAF_NAMES:
                problems.append(f"edge {node_id!r}/{answer} targets unknown node {target!r}")
    for (node_id, answer) in spec.edges:
        if node_id not in spec.nodes:
            problems.append(f"edge source {node_id!r} is not a declared node")
        if answer not in ANSWERS:
            problems.append(f"edge answer must be yes or no, got {answer!r}")
    if problems:
        return problems

    # Cycle check (iterative DFS over node-to-node edges).
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node_id: WHITE for node_id in spec.nodes}

    def targets(node_id: str) -> list[str]:
        return [
            spec.edges[(node_id, a)]
            for a in ANSWERS
            if spec.edges[(node_id, a)] in spec.nodes
        ]

    for start in spec.nodes:
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GRAY
        while stack:
            node_id, index = stack[-1]
            succ = targets(node_id)
            if index < len(succ):
                stack[-1] = (node_id, index + 1)
                nxt = succ[index]
                if color[nxt] == GRAY:
                    problems.append(f"cycle through node {nxt!r}")
                    return problems
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
            else:
                color[node_id] = BLACK
                stack.pop()

    reachable = {spec.root}
    frontier = [spec.root]
    while frontier:
        node_id = frontier.pop()
        for nxt in targets(node_id):
            if nxt not in reachable:
                reachable.add(nxt)
                frontier.append(nxt)
    for node_id in spec.nodes:
        if node_id not in reachable:
            problems.append(f"node {node_id!r} is unreachable from the root")
    return problems


def graph_depth(spec: DecisionGraphSpec) -> int:
    """Longest root-to-leaf path length in answers (graph is a validated DAG)."""
    cache: dict[str, int] = {}

    def depth(target: str) -> int:
        if target in LEAF_NAMES:
            return 0
        if target not in cache:
            cache[target] = 1 + max(depth(spec.edges[(target, a)]) for a in ANSWERS)
        return cache[target]

    return depth(spec.root)


@dataclass(frozen=True)
class Classification:
    """Either a reached impact level or the next pending question."""

    level: ImpactLevel | None = None
    pending_node: str | None = None
    pending_question: str | None = None

    @property
    def done(self) -> bool:
        return self.level is not None


def classify_impact(graph: DecisionGraphSpec, answers: list[str]) -> Classification:
    """Consume answers along edges from the root.

    Returns the leaf level, or the next pending question when answers run out
    before a leaf. Extra answers after a leaf raise E300.
    """
    node = graph.root
    for index, answer in enumerate(answers):
        if answer not in ANSWERS:
            raise SafError("E300", f"answers must be yes/no, got {answer!r}")
        target = graph.edges[(node, answer)]
        if target in LEAF_NAMES:
            if index + 1 < len(answers):
                extra = len(answers) - index - 1
                raise SafError("E300", f"{extra} extra answer(s) after reaching leaf {target!r}")
            return Classification(level=ImpactLevel.from_text(target))
        node = target
    return Classification(pending_node=node, pending_question=graph.nodes[node])


def load_decision_graph(text: str) -> DecisionGraphSpec:
    """Parse the key/value decision-graph config; raises GuidanceConfigError."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise GuidanceConfigError(f"malformed decision graph config: {exc}") from exc
    if not parser.has_option("graph", "root"):
        raise GuidanceConfigError("decision graph config needs [graph] root = <node id>")
    root = parser.get("graph", "root")
    nodes: dict = {}
    edges: dict = {}
    for section in parser.sections():
        if not section.startswith("node."):
            continue
        node_id = section[len("node."):]
        if not parser.has_option(section, "question"):
            raise GuidanceConfigError(f"node {node_id!r} is missing its question")
        nodes[node_id] = parser.get(section, "question")
        for answer in ANSWERS:
            if parser.has_option(section, answer):
                edges[(node_id, answer)] = parser.get(section, answer)
    spec = DecisionGraphSpec(root=root, nodes=nodes, edges=edges)
    problems = validate_graph(spec)
    if problems:
        raise GuidanceConfigError("invalid decision graph: " + "; ".join(problems))
    return spec


DEFAULT_DECISION_GRAPH = DecisionGraphSpec(
    root="q_direct",
    nodes={
        "q_direct": (
            "Can the impact of this concern be measured directly in the software system itself"
            " (e.g. maintainability defined as the level of modularity of the design)?"
        ),
        "q_reuse": (
            "Does the impact only become observable once the system is reused or taken up in"
            " new projects and contexts (e.g. maintainability defined as reusability)?"
        ),
        "q_longterm": (
            "Does the impact emerge over long time periods as structural change of the deployed"
            " system or its context (e.g. maintainability defined as durability)?"
        ),
    },
    edges={
        ("q_direct", "yes"): "immediate",
        ("q_direct", "no"): "q_reuse",
        ("q_reuse", "yes"): "enabling",
        ("q_reuse", "no"): "q_longterm",
        ("q_longterm", "yes"): "systemic",
        ("q_longterm", "no"): "enabling",
    },
)


# --- Checklist ---------------------------------------------------------------


@dataclass(frozen=True)
class ChecklistItem:
    id: str
    prompt: str
    check: str
    applies_to: str = "workspace"


@dataclass(frozen=True)
class ChecklistSpec:
    items: tuple[ChecklistItem, ...] = ()


@dataclass(frozen=True)
class ChecklistResult:
    item_id: str
    status: str  # satisfied | unsatisfied | not_applicable
    evidence: str


def _dims_with_concerns(ws: Workspace) -> set[Dimension]:
    return {c.dimension for dm in ws.decision_maps for c in dm.concerns}


def _rule_has_dm(ws: Workspace):
    if ws.decision_maps:
        return "satisfied", f"{len(ws.decision_maps)} decision map(s) loaded"
    return "unsatisfied", "no decision map loaded"


def _rule_has_qa(ws: Workspace):
    qas = [c for dm in ws.decision_maps for c in dm.concerns if c.kind.value == "quality_attribute"]
    if qas:
        return "satisfied", f"{len(qas)} quality attribute(s): " + ", ".join(sorted(c.id for c in qas)[:5])
    return "unsatisfied", "no quality attribute identified"


def _rule_has_requirement(ws: Workspace):
    reqs = [
        c for dm in ws.decision_maps for c in dm.concerns
        if c.kind.value == "sustainability_requirement"
    ]
    if reqs:
        return "satisfied", f"{len(reqs)} sustainability requirement(s)"
    return "unsatisfied", "no sustainability requirement captured"


def _rule_all_dimensions_considered(ws: Workspace):
    if not ws.decision_maps:
        return "not_applicable", "no decision map loaded"
    missing = sorted(d.value for d in Dimension if d not in _dims_with_concerns(ws))
    if missing:
        return "unsatisfied", "dimensions without concerns: " + ", ".join(missing)
    return "satisfied", "all four dimensions carry at least one concern"


def _rule_dimension_coverage(ws: Workspace):
    """Every dimension referenced by a loaded matrix has at least one concern."""
    if not ws.matrices:
        return "not_applicable", "no dependency matrix loaded"
    considered = {m.row_dimension for m in ws.matrices} | {m.col_dimension for m in ws.matrices}
    covered = _dims_with_concerns(ws)
    missing = sorted(d.value for d in considered if d not in covered)
    if missing:
        return "unsatisfied", "matrix dimensions without concerns: " + ", ".join(missing)
    return "satisfied", "concerns exist for every matrix dimension"


def _rule_qa_per_considered_dimension(ws: Workspace):
    """Every dimension with >= 1 concern also appears in some SQ model entry."""
    if not ws.sq_models:
        return "not_applicable", "no SQ model loaded"
    considered = _dims_with_concerns(ws)
    if not considered:
        return "not_applicable", "no concerns in any decision map"
    sq_dims = {d for sq in ws.sq_models for e in sq.entries for d in e.dimensions}
    missing = sorted(d.value for d in considered if d not in sq_dims)
    if missing:
        return "unsatisfied", "dimensions lacking SQ model coverage: " + ", ".join(missing)
    return "satisfied", "SQ model covers every considered dimension"


def _rule_effects_captured(ws: Workspace):
    count = sum(len(dm.effects) for dm in ws.decision_maps)
    if count:
        return "satisfied", f"{count} effect(s) captured"
    return "unsatisfied", "no sustainability effects captured"


def _rule_effects_decided(ws: Workspace):
    undecided = [
        f"{e.source}->{e.target}"
        for dm in ws.decision_maps
        for e in dm.effects
        if e.effect_type is EffectType.UNDECIDED
    ]
    if not any(dm.effects for dm in ws.decision_maps):
        return "not_applicable", "no effects captured yet"
    if undecided:
        return "unsatisfied", "undecided effects: " + ", ".join(sorted(undecided))
    return "satisfied", "every effect carries a decided type"


def _rule_concerns_connected(ws: Workspace):
    isolated: list[str] = []
    for dm in ws.decision_maps:
        touched: set[str] = set()
        for e in dm.effects:
            touched.add(e.source.split(".", 1)[0])
            touched.add(e.target)
        isolated.extend(c.id for c in dm.concerns if c.id not in touched)
    if not any(dm.concerns for dm in ws.decision_maps):
        return "not_applicable", "no concerns in any decision map"
    if isolated:
        return "unsatisfied", "concerns without effects: " + ", ".join(sorted(isolated))
    return "satisfied", "every concern participates in the effect network"


def _rule_metrics_defined(ws: Workspace):
    if not ws.sq_models:
        return "not_applicable", "no SQ model loaded"
    qa_ids = {
        c.id for dm in ws.decision_maps for c in dm.concerns
        if c.kind.value == "quality_attribute"
    }
    if not qa_ids:
        return "not_applicable", "no quality attributes in any decision map"
    unmeasured = []
    for qa_id in sorted(qa_ids):
        entry = next((sq.entry(qa_id) for sq in ws.sq_models if sq.entry(qa_id)), None)
        if entry is None or not entry.metrics:
            unmeasured.append(qa_id)
    if unmeasured:
        return "unsatisfied", "quality attributes without metrics: " + ", ".join(unmeasured)
    return "satisfied", "every modeled quality attribute has at least one metric"


RULE_CATALOG: dict[str, Callable] = {
    "has_dm": _rule_has_dm,
    "has_qa": _rule_has_qa,
    "has_sustainability_requirement": _rule_has_requirement,
    "all_dimensions_considered": _rule_all_dimensions_considered,
    "dimension_coverage": _rule_dimension_coverage,
    "has_qa_per_considered_dimension": _rule_qa_per_considered_dimension,
    "effects_captured": _rule_effects_captured,
    "effects_decided": _rule_effects_decided,
    "concerns_connected": _rule_concerns_connected,
    "metrics_defined": _rule_metrics_defined,
}

DEFAULT_CHECKLIST = ChecklistSpec(
    items=(
        ChecklistItem("dm_started", "Has a Decision Map been started for the system under design?", "has_dm", "dm"),
        ChecklistItem("main_qas", "Have the main quality attributes of the project been identified?", "has_qa", "dm"),
        ChecklistItem(
            "sustainability_requirements",
            "Have sustainability-related requirements been made explicit next to the quality attributes?",
            "has_sustainability_requirement",
            "dm",
        ),
        ChecklistItem(
            "four_dimensions",
            "Has each of the four sustainability dimensions been considered for relevant concerns?",
            "all_dimensions_considered",
            "dm",
        ),
        ChecklistItem(
            "dimension_coverage",
            "Do the loaded dependency matrices match dimensions actually present in the map?",
            "dimension_coverage",
            "matrix",
        ),
        ChecklistItem(
            "sq_backing",
            "Does the SQ model consolidate definitions for every considered dimension?",
            "has_qa_per_considered_dimension",
            "sq",
        ),
        ChecklistItem(
            "effects_captured",
            "Have the sustainability effects between concerns been captured as arrows?",
            "effects_captured",
            "dm",
        ),
        ChecklistItem(
            "effects_decided",
            "Has each effect been decided as positive or negative where evidence exists?",
            "effects_decided",
            "dm",
        ),
        ChecklistItem(
            "concerns_connected",
            "Is every concern connected to the effect network (no orphans)?",
            "concerns_connected",
            "dm",
        ),
        ChecklistItem(
            "metrics_defined",
            "Does every modeled quality attribute have at least one metric to measure it?",
            "metrics_defined",
            "sq",
        ),
    )
)


def load_checklist(text: str) -> ChecklistSpec:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise GuidanceConfigError(f"malformed checklist config: {exc}") from exc
    items: list[ChecklistItem] = []
    for section in parser.sections():
        if not section.startswith("item."):
            continue
        item_id = section[len("item."):]
        if not parser.has_option(section, "check"):
            raise GuidanceConfigError(f"checklist item {item_id!r} is missing its check rule")
        check = parser.get(section, "check")
        if check not in RULE_CATALOG:
            raise GuidanceConfigError(f"checklist item {item_id!r} references unknown rule {check!r}")
        items.append(
            ChecklistItem(
                id=item_id,
                prompt=parser.get(section, "prompt", fallback=item_id),
                check=check,
                applies_to=parser.get(section, "applies_to", fallback="workspace"),
            )
        )
    ids = [item.id for item in items]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise GuidanceConfigError("duplicate checklist item ids: " + ", ".join(dupes))
    return ChecklistSpec(items=tuple(items))


def checklist_report(ws: Workspace, checklist: ChecklistSpec | None = None) -> list[ChecklistResult]:
    """One entry per item; a report, not a validation (no severities)."""
    checklist = checklist or DEFAULT_CHECKLIST
    report: list[ChecklistResult] = []
    for item in checklist.items:
        status, evidence = RULE_CATALOG[item.check](ws)
        report.append(ChecklistResult(item.id, status, evidence))
    return report


# --- Effect suggestions ------------------------------------------------------

_CELL_TO_EFFECT = {
    DependencyValue.PLUS: EffectType.POSITIVE,
    DependencyValue.MINUS: EffectType.NEGATIVE,
    DependencyValue.INDETERMINATE: EffectType.UNDECIDED,
}


@dataclass(frozen=True)
class Suggestion:
    source_qa: str
    target_qa: str
    suggested_type: EffectType
    matrix_id: str
    rationale: str

    def to_json(self) -> dict:
        return {
            "source_qa": self.source_qa,
            "target_qa": self.target_qa,
            "suggested_type": self.suggested_type.value,
            "matrix_id": self.matrix_id,
            "rationale": self.rationale,
        }


def suggest_effects(dm: DecisionMap, matrices: list[DependencyMatrix]) -> list[Suggestion]:
    """Advisory suggestions from matrix cells; never mutates the map.

    For each concern pair carrying a matrix cell: suggest a new effect when
    none exists; suggest a resolution when the only existing effects are
    undecided and the cell is decided. Pairs with a decided effect are left
    alone. Order is deterministic: (matrix id, row position, column position).
    """
    concern_ids = dm.concern_ids()
    effects_by_pair: dict[tuple[str, str], list[EffectType]] = {}
    for effect in dm.effects:
        effects_by_pair.setdefault((effect.source, effect.target), []).append(effect.effect_type)

    suggestions: list[Suggestion] = []
    for matrix in sorted(matrices, key=lambda m: m.id):
        for row_qa in matrix.rows:
            if row_qa not in concern_ids:
                continue
            for col_qa in matrix.cols:
                if col_qa not in concern_ids or row_qa == col_qa:
                    continue
                cell = matrix.cells.get((row_qa, col_qa))
                if cell is None:
                    continue
                existing = effects_by_pair.get((row_qa, col_qa))
                if existing is None:
                    suggestions.append(
                        Suggestion(
                            source_qa=row_qa,
                            target_qa=col_qa,
                            suggested_type=_CELL_TO_EFFECT[cell],
                            matrix_id=matrix.id,
                            rationale=(
                                f"matrix {matrix.id} marks ({row_qa}, {col_qa}) as"
                                f" '{cell.value}' and the map has no effect for this pair"
                            ),
                        )
                    )
                elif (
                    all(t is EffectType.UNDECIDED for t in existing)
                    and cell is not DependencyValue.INDETERMINATE
                ):
                    suggestions.append(
                        Suggestion(
                            source_qa=row_qa,
                            target_qa=col_qa,
                            suggested_type=_CELL_TO_EFFECT[cell],
                            matrix_id=matrix.id,
                            rationale=(
                                f"undecided effect ({row_qa} -> {col_qa}) can be resolved:"
                                f" matrix {matrix.id} holds '{cell.value}'"
                            ),
                        )
                    )
    return suggestions
