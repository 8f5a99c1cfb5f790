"""Core domain types for decision maps, SQ models and dependency matrices.

All types are immutable values; edits are modeled as construct-new-from-old
(dataclasses.replace). Source locations are carried for diagnostics but are
excluded from structural equality, so a re-parsed document compares equal to
its canonical original.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .diagnostics import SafError, SourceLocation

IDENTIFIER_RE = re.compile(r"[a-z][a-z0-9_-]*")


def is_identifier(value: str) -> bool:
    """True iff value is a lowercase slug of 1-64 chars."""
    return 1 <= len(value) <= 64 and IDENTIFIER_RE.fullmatch(value) is not None


def slugify(value: str) -> str:
    """Best-effort conversion of free text into a valid identifier."""
    slug = re.sub(r"[^a-z0-9_-]+", "_", value.strip().lower()).strip("_") or "x"
    if not slug[0].isalpha():
        slug = "x" + slug
    return slug[:64]


class Dimension(Enum):
    TECHNICAL = "technical"
    ECONOMIC = "economic"
    SOCIAL = "social"
    ENVIRONMENTAL = "environmental"

    @property
    def rank(self) -> int:
        return _DIMENSION_RANK[self]

    @classmethod
    def from_text(cls, text: str) -> Dimension:
        return _enum_from_text(cls, text, "dimension")


_DIMENSION_RANK = {d: i for i, d in enumerate(Dimension)}


class ImpactLevel(Enum):
    """Time dimension of a sustainability impact, ordered immediate < enabling < systemic."""

    IMMEDIATE = "immediate"
    ENABLING = "enabling"
    SYSTEMIC = "systemic"

    @property
    def rank(self) -> int:
        return _IMPACT_RANK[self]

    def __lt__(self, other: ImpactLevel) -> bool:
        return self.rank < other.rank

    def __le__(self, other: ImpactLevel) -> bool:
        return self.rank <= other.rank

    def __gt__(self, other: ImpactLevel) -> bool:
        return self.rank > other.rank

    def __ge__(self, other: ImpactLevel) -> bool:
        return self.rank >= other.rank

    @classmethod
    def from_text(cls, text: str) -> ImpactLevel:
        return _enum_from_text(cls, text, "impact level")


_IMPACT_RANK = {l: i for i, l in enumerate(ImpactLevel)}


class EffectType(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNDECIDED = "undecided"

    @classmethod
    def from_text(cls, text: str) -> EffectType:
        return _enum_from_text(cls, text, "effect type")


class ConcernKind(Enum):
    QUALITY_ATTRIBUTE = "quality_attribute"
    SUSTAINABILITY_REQUIREMENT = "sustainability_requirement"

    @classmethod
    def from_text(cls, text: str) -> ConcernKind:
        return _enum_from_text(cls, text, "concern kind")


class MetricKind(Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"
    QUALITY_IN_USE = "quality_in_use"

    @classmethod
    def from_text(cls, text: str) -> MetricKind:
        return _enum_from_text(cls, text, "metric kind")


class DependencyValue(Enum):
    PLUS = "+"
    MINUS = "-"
    INDETERMINATE = "I"

    @classmethod
    def from_text(cls, text: str) -> DependencyValue:
        return _enum_from_text(cls, text, "dependency value")


def _enum_from_text(cls, text: str, what: str):
    for member in cls:
        if member.value == text:
            return member
    raise ValueError(f"unknown {what}: {text!r}")


# --- Decision Map -----------------------------------------------------------


@dataclass(frozen=True)
class Concern:
    """A design concern: a quality attribute or a sustainability requirement."""

    id: str
    name: str
    kind: ConcernKind
    dimension: Dimension
    impact: ImpactLevel
    description: str | None = None
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Variant:
    id: str
    name: str
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Feature:
    """Externally observable software property; sits outside the time bands."""

    id: str
    name: str
    description: str | None = None
    variants: tuple[Variant, ...] = ()
    realized_by: tuple[str, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Effect:
    """Typed sustainability effect; terminates on a concern.

    source is an element reference: a concern or feature id, or the dotted
    form ``feature.variant``.
    """

    source: str
    target: str
    effect_type: EffectType
    impact_label: str | None = None
    location: SourceLocation | None = field(default=None, compare=False)

    @property
    def source_variant(self) -> tuple[str, str] | None:
        """(feature, variant) pair when the source is dotted, else None."""
        if "." in self.source:
            feat, var = self.source.split(".", 1)
            return feat, var
        return None


@dataclass(frozen=True)
class SustainabilityGoal:
    id: str
    statement: str
    linked_concerns: tuple[str, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class DecisionMap:
    id: str
    title: str
    system_name: str
    concerns: tuple[Concern, ...] = ()
    features: tuple[Feature, ...] = ()
    effects: tuple[Effect, ...] = ()
    goals: tuple[SustainabilityGoal, ...] = ()
    metadata: dict = field(default_factory=dict)
    location: SourceLocation | None = field(default=None, compare=False)

    def concern(self, concern_id: str) -> Concern | None:
        for c in self.concerns:
            if c.id == concern_id:
                return c
        return None

    def feature(self, feature_id: str) -> Feature | None:
        for f in self.features:
            if f.id == feature_id:
                return f
        return None

    def concern_ids(self) -> set[str]:
        return {c.id for c in self.concerns}


# --- SQ Model ---------------------------------------------------------------


@dataclass(frozen=True)
class MetricSpec:
    id: str
    name: str
    metric_kind: MetricKind
    unit: str
    description: str | None = None
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SQEntry:
    """One quality attribute row: name, definition, source, dimensions, metrics."""

    qa_id: str
    name: str
    definition: str
    source_ref: str
    dimensions: frozenset[Dimension]
    metrics: tuple[MetricSpec, ...] = ()
    location: SourceLocation | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SQModel:
    id: str
    entries: tuple[SQEntry, ...] = ()

    def entry(self, qa_id: str) -> SQEntry | None:
        for e in self.entries:
            if e.qa_id == qa_id:
                return e
        return None

    def metric_ids(self) -> set[str]:
        return {m.id for e in self.entries for m in e.metrics}


# --- Dependency Matrix ------------------------------------------------------


@dataclass(frozen=True)
class DependencyMatrix:
    """Interdimensional QA x QA grid; cell direction is row -> column."""

    id: str
    row_dimension: Dimension
    col_dimension: Dimension
    rows: tuple[str, ...] = ()
    cols: tuple[str, ...] = ()
    cells: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.row_dimension == self.col_dimension:
            raise ValueError("dependency matrix dimensions must differ (interdimensional)")
        row_set, col_set = set(self.rows), set(self.cols)
        for row, col in self.cells:
            if row not in row_set or col not in col_set:
                raise ValueError(f"cell ({row}, {col}) outside declared matrix headers")

    def cell(self, row_qa: str, col_qa: str) -> DependencyValue | None:
        return self.cells.get((row_qa, col_qa))


# --- Canonical forms --------------------------------------------------------


def canonicalize(dm: DecisionMap) -> DecisionMap:
    """Stable ordering for diffs and byte-identical serialization; idempotent."""
    concerns = tuple(
        sorted(dm.concerns, key=lambda c: (c.impact.rank, c.dimension.rank, c.id))
    )
    features = tuple(
        replace(
            f,
            variants=tuple(sorted(f.variants, key=lambda v: v.id)),
            realized_by=tuple(sorted(f.realized_by)),
        )
        for f in sorted(dm.features, key=lambda f: f.id)
    )
    effects = tuple(
        sorted(
            dm.effects,
            key=lambda e: (e.source, e.target, e.effect_type.value, e.impact_label or ""),
        )
    )
    goals = tuple(
        replace(g, linked_concerns=tuple(sorted(g.linked_concerns)))
        for g in sorted(dm.goals, key=lambda g: g.id)
    )
    metadata = dict(sorted(dm.metadata.items()))
    return replace(
        dm, concerns=concerns, features=features, effects=effects, goals=goals, metadata=metadata
    )


def canonicalize_sq(model: SQModel) -> SQModel:
    return replace(model, entries=tuple(sorted(model.entries, key=lambda e: e.qa_id)))


def canonicalize_matrix(matrix: DependencyMatrix) -> DependencyMatrix:
    return replace(
        matrix,
        rows=tuple(sorted(matrix.rows)),
        cols=tuple(sorted(matrix.cols)),
        cells=dict(sorted(matrix.cells.items())),
    )


def merge_sq(generic: SQModel, project: SQModel) -> SQModel:
    """Overlay a project SQ model on a generic one.

    Project entries replace generic entries with the same qa_id wholesale;
    everything else is unioned. Raises SafError E002 when the project model
    itself carries duplicate qa_ids (the generic is assumed pre-validated).
    """
    project_ids = [e.qa_id for e in project.entries]
    dupes = {qa for qa in project_ids if project_ids.count(qa) > 1}
    if dupes:
        raise SafError("E002", f"duplicate qa_id in project SQ model: {', '.join(sorted(dupes))}")
    by_id = {e.qa_id: e for e in project.entries}
    merged = [by_id.pop(e.qa_id, e) for e in generic.entries]
    merged.extend(e for e in project.entries if e.qa_id in by_id)
    return SQModel(id=project.id, entries=tuple(merged))
