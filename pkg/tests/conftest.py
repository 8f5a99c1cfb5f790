"""Shared fixtures and hypothesis strategies for generating valid documents."""

from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import strategies as st

from saftoolkit.archtrace import ArchitectureDescription, ArchitectureElement, DesignDecision
from saftoolkit.kpi import (
    Aggregation,
    BinaryOp,
    CriticalSuccessFactor,
    FitnessExpression,
    KpiDocument,
    KpiSpec,
    NumberLiteral,
    OrganizationalGoal,
    ActionSpec,
    Target,
)
from saftoolkit.model import (
    Concern,
    ConcernKind,
    DecisionMap,
    DependencyMatrix,
    DependencyValue,
    Dimension,
    Effect,
    EffectType,
    Feature,
    ImpactLevel,
    MetricSpec,
    MetricKind,
    SQEntry,
    SQModel,
    SustainabilityGoal,
    Variant,
)

FIXTURES = Path(__file__).parent / "fixtures"

# Keywords that terminate identifier lists in the grammars; generated ids avoid
# them so every generated document stays serializable and re-parseable.
RESERVED = {
    "decision_map", "system", "feature", "qa", "requirement", "effect", "goal",
    "meta", "variant", "realized_by", "description", "label", "concerns",
    "dimension", "impact", "csf", "kpi", "action", "expr", "target", "unit",
    "on_miss", "sustainability_goal", "architecture", "element", "decision",
    "represents", "options", "chosen", "pertains_to", "characterized_by", "kind",
    "immediate", "enabling", "systemic",
}

identifiers = st.from_regex(r"[a-z][a-z0-9_-]{0,9}", fullmatch=True).filter(
    lambda s: s not in RESERVED
)

labels = st.text(
    st.characters(min_codepoint=32, max_codepoint=0x24F, blacklist_characters="\x7f"),
    min_size=0,
    max_size=24,
)

plain_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
).filter(lambda v: "e" not in repr(float(v)))

dimensions = st.sampled_from(list(Dimension))
impact_levels = st.sampled_from(list(ImpactLevel))
effect_types = st.sampled_from(list(EffectType))
windows = st.sampled_from(["all", "7d", "24h", "30m", "1h", "2d", "90m"])


@st.composite
def id_lists(draw, min_size=0, max_size=5):
    return draw(st.lists(identifiers, min_size=min_size, max_size=max_size, unique=True))


@st.composite
def decision_maps(draw, min_concerns: int = 0, element_pool: tuple[str, ...] = ()):
    """A resolvable DecisionMap; realized_by only draws from element_pool."""
    concern_ids = draw(id_lists(min_size=min_concerns, max_size=6))
    feature_ids = draw(
        st.lists(
            identifiers.filter(lambda s: True), min_size=0, max_size=3, unique=True
        ).map(lambda ids: [i for i in ids if i not in concern_ids])
    )
    concerns = tuple(
        Concern(
            id=cid,
            name=draw(labels),
            kind=draw(st.sampled_from(list(ConcernKind))),
            dimension=draw(dimensions),
            impact=draw(impact_levels),
            description=draw(st.none() | labels),
        )
        for cid in concern_ids
    )
    features = []
    variant_refs: list[str] = []
    for fid in feature_ids:
        variant_ids = draw(id_lists(max_size=2))
        variants = tuple(Variant(vid, draw(labels)) for vid in variant_ids)
        variant_refs.extend(f"{fid}.{vid}" for vid in variant_ids)
        realized = (
            tuple(draw(st.lists(st.sampled_from(list(element_pool)), max_size=2, unique=True)))
            if element_pool
            else ()
        )
        features.append(
            Feature(
                id=fid,
                name=draw(labels),
                description=draw(st.none() | labels),
                variants=variants,
                realized_by=realized,
            )
        )
    sources = concern_ids + feature_ids + variant_refs
    effects = []
    if sources and concern_ids:
        pair_pool = [(s, t) for s in sources for t in concern_ids if s != t]
        for source, target in draw(
            st.lists(st.sampled_from(pair_pool), max_size=6, unique=True) if pair_pool else st.just([])
        ):
            effects.append(
                Effect(
                    source=source,
                    target=target,
                    effect_type=draw(effect_types),
                    impact_label=draw(st.none() | labels),
                )
            )
    goals = []
    for gid in draw(id_lists(max_size=2)):
        if gid in concern_ids or gid in feature_ids:
            continue
        linked = draw(st.lists(st.sampled_from(concern_ids), max_size=3, unique=True)) if concern_ids else []
        goals.append(SustainabilityGoal(id=gid, statement=draw(labels), linked_concerns=tuple(linked)))
    metadata = draw(
        st.dictionaries(st.text(min_size=1, max_size=8, alphabet="abcdefgh_"), labels, max_size=2)
    )
    return DecisionMap(
        id=draw(identifiers),
        title=draw(labels),
        system_name=draw(labels),
        concerns=concerns,
        features=tuple(features),
        effects=tuple(effects),
        goals=tuple(goals),
        metadata=metadata,
    )


metric_descriptions = labels.map(lambda s: s.replace('"', "'"))


@st.composite
def sq_models(draw, metric_pool: list[str] | None = None):
    qa_ids = draw(id_lists(max_size=5))
    used_metric_ids: set[str] = set()
    entries = []
    for qa_id in qa_ids:
        metric_ids = [
            m for m in draw(id_lists(max_size=3)) if m not in used_metric_ids
        ]
        used_metric_ids.update(metric_ids)
        metrics = tuple(
            MetricSpec(
                id=mid,
                name=mid,
                metric_kind=draw(st.sampled_from(list(MetricKind))),
                unit=draw(st.sampled_from(["s", "J", "%", "EUR", "kWh", ""])),
                description=draw(st.none() | metric_descriptions),
            )
            for mid in metric_ids
        )
        entries.append(
            SQEntry(
                qa_id=qa_id,
                name=draw(labels),
                definition=draw(labels),
                source_ref=draw(labels),
                dimensions=frozenset(draw(st.sets(dimensions, min_size=1, max_size=4))),
                metrics=metrics,
            )
        )
    if metric_pool is not None:
        metric_pool.extend(sorted(used_metric_ids))
    return SQModel(id=draw(identifiers), entries=tuple(entries))


@st.composite
def dependency_matrices(draw, qa_pool: tuple[str, ...] = ()):
    dims = draw(st.lists(dimensions, min_size=2, max_size=2, unique=True))
    if qa_pool and draw(st.booleans()):
        rows = draw(st.lists(st.sampled_from(list(qa_pool)), min_size=1, max_size=4, unique=True))
        cols = draw(st.lists(st.sampled_from(list(qa_pool)), min_size=1, max_size=4, unique=True))
    else:
        rows = draw(id_lists(min_size=1, max_size=4))
        cols = draw(id_lists(min_size=1, max_size=4))
    cells = {}
    for row in rows:
        for col in cols:
            value = draw(st.none() | st.sampled_from(list(DependencyValue)))
            if value is not None:
                cells[(row, col)] = value
    return DependencyMatrix(
        id=draw(identifiers),
        row_dimension=dims[0],
        col_dimension=dims[1],
        rows=tuple(rows),
        cols=tuple(cols),
        cells=cells,
    )


@st.composite
def expressions(draw, metric_pool: tuple[str, ...], depth: int = 2):
    if depth <= 0 or draw(st.integers(0, 2)) == 0:
        if draw(st.booleans()):
            return NumberLiteral(draw(plain_floats))
        return Aggregation(
            fn=draw(st.sampled_from(["avg", "sum", "min", "max", "last", "count"])),
            metric=draw(st.sampled_from(list(metric_pool))),
            window=draw(windows),
        )
    left = draw(expressions(metric_pool, depth - 1))
    right = draw(expressions(metric_pool, depth - 1))
    return BinaryOp(draw(st.sampled_from(["+", "-", "*", "/"])), left, right)


@st.composite
def kpi_documents(draw, metric_pool: tuple[str, ...], concern_pool: tuple[str, ...]):
    """Intra-document references always resolve; metric/concern refs draw from pools."""
    goal_ids = draw(id_lists(min_size=1, max_size=2))
    csf_ids = [i for i in draw(id_lists(min_size=1, max_size=2)) if i not in goal_ids]
    action_ids = [
        i for i in draw(id_lists(max_size=2)) if i not in goal_ids and i not in csf_ids
    ]
    kpi_ids = [
        i
        for i in draw(id_lists(max_size=3))
        if i not in goal_ids and i not in csf_ids and i not in action_ids
    ]
    goals = tuple(OrganizationalGoal(gid, draw(labels)) for gid in goal_ids)
    csfs = tuple(
        CriticalSuccessFactor(cid, draw(labels), draw(st.sampled_from(goal_ids)))
        for cid in csf_ids
    )
    actions = tuple(
        ActionSpec(
            aid,
            draw(labels),
            tuple(draw(st.lists(st.sampled_from(list(concern_pool)), max_size=2, unique=True)))
            if concern_pool
            else (),
        )
        for aid in action_ids
    )
    kpis = []
    if csf_ids and concern_pool and metric_pool:
        for kid in kpi_ids:
            kpis.append(
                KpiSpec(
                    id=kid,
                    name=draw(labels),
                    csf_ref=draw(st.sampled_from(csf_ids)),
                    expression=FitnessExpression(draw(expressions(metric_pool))),
                    target=Target(
                        draw(st.sampled_from(["<", "<=", ">", ">="])),
                        draw(plain_floats),
                        draw(st.sampled_from(["s", "J", "%", ""])),
                    ),
                    concern_refs=tuple(
                        draw(
                            st.lists(
                                st.sampled_from(list(concern_pool)), min_size=1, max_size=2, unique=True
                            )
                        )
                    ),
                    action_refs=tuple(
                        draw(st.lists(st.sampled_from(action_ids), max_size=2, unique=True))
                        if action_ids
                        else []
                    ),
                )
            )
    return KpiDocument(
        id=draw(identifiers),
        goals=goals,
        csfs=csfs,
        kpis=tuple(kpis),
        actions=actions,
    )


@st.composite
def architectures(draw, concern_pool: tuple[str, ...] = (), feature_pool: tuple[str, ...] = ()):
    element_ids = draw(id_lists(max_size=4))
    decision_ids = [i for i in draw(id_lists(max_size=3)) if i not in element_ids]
    elements = tuple(
        ArchitectureElement(
            eid,
            draw(labels),
            draw(st.sampled_from(["software_service", "component", "datastore"])),
        )
        for eid in element_ids
    )
    decisions = []
    for did in decision_ids:
        options = tuple(draw(st.lists(labels, max_size=3)))
        chosen = (
            draw(st.none() | st.integers(0, len(options) - 1)) if options else None
        )
        pertains = (
            tuple(draw(st.lists(st.sampled_from(list(concern_pool)), max_size=2, unique=True)))
            if concern_pool
            else ()
        )
        characterized = (
            tuple(draw(st.lists(st.sampled_from(list(concern_pool)), max_size=2, unique=True)))
            if concern_pool
            else ()
        )
        decisions.append(
            DesignDecision(
                id=did,
                statement=draw(labels),
                options=options,
                chosen=chosen,
                pertains_to=pertains,
                characterized_by=characterized,
            )
        )
    represents = {}
    if feature_pool and decision_ids:
        for fid in draw(st.lists(st.sampled_from(list(feature_pool)), max_size=3, unique=True)):
            represents[fid] = draw(st.sampled_from(decision_ids))
    return ArchitectureDescription(
        id=draw(identifiers),
        elements=elements,
        decisions=tuple(decisions),
        represents=represents,
    )


@pytest.fixture
def smart_lighting_dir() -> Path:
    return FIXTURES / "smart_lighting"


@pytest.fixture
def conflict_dir() -> Path:
    return FIXTURES / "conflict"


@pytest.fixture
def cloud_dir() -> Path:
    return FIXTURES / "cloud"


@pytest.fixture
def zahori_dir() -> Path:
    return FIXTURES / "zahori"


def load_fixture_workspace(directory: Path):
    from saftoolkit.dsl import parse_workspace

    result = parse_workspace(directory)
    assert result.document is not None, [d.render() for d in result.diagnostics]
    return result.document
