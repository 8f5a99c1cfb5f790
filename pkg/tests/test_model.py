"""Core model: identifiers, enum closure, merge_sq, canonicalize, resolution."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import decision_maps, load_fixture_workspace
from saftoolkit.diagnostics import SafError
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
    MetricKind,
    SQEntry,
    SQModel,
    canonicalize,
    is_identifier,
)
from saftoolkit.workspace import resolve_workspace


class TestIdentifiers:
    @pytest.mark.parametrize("value", ["a", "energy_savings", "a1", "x-y", "a" * 64])
    def test_valid(self, value):
        assert is_identifier(value)

    @pytest.mark.parametrize("value", ["", "A", "1a", "_a", "a b", "é", "a" * 65])
    def test_invalid(self, value):
        assert not is_identifier(value)


class TestEnumClosure:
    CLOSED = [
        (Dimension, {"technical", "economic", "social", "environmental"}),
        (ImpactLevel, {"immediate", "enabling", "systemic"}),
        (EffectType, {"positive", "negative", "undecided"}),
        (MetricKind, {"internal", "external", "quality_in_use"}),
        (DependencyValue, {"+", "-", "I"}),
    ]

    def test_exact_members(self):
        for enum_cls, values in self.CLOSED:
            assert {m.value for m in enum_cls} == values

    @given(st.text(max_size=20))
    def test_fuzzed_values_rejected(self, text):
        for enum_cls, values in self.CLOSED:
            if text in values:
                assert enum_cls.from_text(text).value == text
            else:
                with pytest.raises(ValueError):
                    enum_cls.from_text(text)

    def test_impact_level_ordinal(self):
        assert ImpactLevel.IMMEDIATE < ImpactLevel.ENABLING < ImpactLevel.SYSTEMIC
        assert ImpactLevel.SYSTEMIC > ImpactLevel.IMMEDIATE
        assert ImpactLevel.ENABLING >= ImpactLevel.ENABLING


def _entry(qa_id: str, definition: str) -> SQEntry:
    return SQEntry(
        qa_id=qa_id,
        name=qa_id,
        definition=definition,
        source_ref="src",
        dimensions=frozenset({Dimension.TECHNICAL}),
    )


class TestMergeSq:
    def test_project_overrides_generic_execution_time(self):
        # Generic ET entry refined by the project model: exactly one ET entry
        # with the project definition survives.
        from saftoolkit.model import merge_sq

        generic = SQModel("generic", (_entry("execution_time", "generic definition"),))
        project = SQModel("zahori", (_entry("execution_time", "time per variant"),))
        merged = merge_sq(generic, project)
        assert [e.qa_id for e in merged.entries] == ["execution_time"]
        assert merged.entries[0].definition == "time per variant"

    def test_identity_under_empty_generic(self):
        from saftoolkit.model import merge_sq

        project = SQModel("p", (_entry("energy_efficiency", "d"),))
        merged = merge_sq(SQModel("g"), project)
        assert merged.entries == project.entries

    def test_exhaustive_small_universe(self):
        # Oracle: key-wise map union with right bias, over every subset pair
        # of a 4-entry universe.
        from saftoolkit.model import merge_sq

        universe = ["qa_a", "qa_b", "qa_c", "qa_d"]
        for g_keys in itertools.chain.from_iterable(
            itertools.combinations(universe, n) for n in range(5)
        ):
            for p_keys in itertools.chain.from_iterable(
                itertools.combinations(universe, n) for n in range(5)
            ):
                generic = SQModel("g", tuple(_entry(k, f"g:{k}") for k in g_keys))
                project = SQModel("p", tuple(_entry(k, f"p:{k}") for k in p_keys))
                merged = merge_sq(generic, project)
                expected = {k: f"g:{k}" for k in g_keys} | {k: f"p:{k}" for k in p_keys}
                assert {e.qa_id: e.definition for e in merged.entries} == expected

    def test_associative_on_disjoint_keys(self):
        from saftoolkit.model import merge_sq

        a = SQModel("a", (_entry("qa_a", "a"),))
        b = SQModel("b", (_entry("qa_b", "b"),))
        c = SQModel("c", (_entry("qa_c", "c"),))
        left = merge_sq(merge_sq(a, b), c)
        right = merge_sq(a, merge_sq(b, c))
        assert {e.qa_id: e.definition for e in left.entries} == {
            e.qa_id: e.definition for e in right.entries
        }

    def test_duplicate_project_ids_rejected(self):
        from saftoolkit.model import merge_sq

        project = SQModel("p", (_entry("qa_x", "1"), _entry("qa_x", "2")))
        with pytest.raises(SafError) as exc:
            merge_sq(SQModel("g"), project)
        assert exc.value.code == "E002"


class TestCanonicalize:
    def test_idempotent_on_canonical_map(self):
        dm = DecisionMap(
            id="m",
            title="T",
            system_name="S",
            concerns=(
                Concern("a", "A", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.IMMEDIATE),
            ),
        )
        once = canonicalize(dm)
        assert canonicalize(once) == once

    def test_effect_ordering(self):
        base = dict(
            id="m",
            title="T",
            system_name="S",
            concerns=(
                Concern("a", "A", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.IMMEDIATE),
                Concern("b", "B", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.IMMEDIATE),
                Concern("c", "C", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.IMMEDIATE),
            ),
        )
        dm = DecisionMap(
            effects=(
                Effect("a", "c", EffectType.POSITIVE),
                Effect("a", "b", EffectType.POSITIVE),
            ),
            **base,
        )
        out = canonicalize(dm)
        assert [(e.source, e.target) for e in out.effects] == [("a", "b"), ("a", "c")]

    def test_concern_sort_key(self):
        dm = DecisionMap(
            id="m",
            title="T",
            system_name="S",
            concerns=(
                Concern("late", "L", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.SYSTEMIC),
                Concern("zz", "Z", ConcernKind.QUALITY_ATTRIBUTE, Dimension.ECONOMIC, ImpactLevel.IMMEDIATE),
                Concern("aa", "A", ConcernKind.QUALITY_ATTRIBUTE, Dimension.TECHNICAL, ImpactLevel.IMMEDIATE),
            ),
        )
        out = canonicalize(dm)
        assert [c.id for c in out.concerns] == ["aa", "zz", "late"]

    @given(decision_maps())
    @settings(max_examples=60)
    def test_idempotent(self, dm):
        once = canonicalize(dm)
        assert canonicalize(once) == once

    def test_permutation_invariant_100_shuffles(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        expected = canonicalize(dm)
        rng = random.Random(7)
        for _ in range(100):
            concerns, features, effects, goals = (
                list(dm.concerns),
                list(dm.features),
                list(dm.effects),
                list(dm.goals),
            )
            for seq in (concerns, features, effects, goals):
                rng.shuffle(seq)
            shuffled = DecisionMap(
                id=dm.id,
                title=dm.title,
                system_name=dm.system_name,
                concerns=tuple(concerns),
                features=tuple(features),
                effects=tuple(effects),
                goals=tuple(goals),
                metadata=dict(dm.metadata),
            )
            assert canonicalize(shuffled) == expected

    @given(decision_maps(), st.randoms())
    @settings(max_examples=40)
    def test_permutation_invariant_generated(self, dm, rng):
        concerns = list(dm.concerns)
        effects = list(dm.effects)
        rng.shuffle(concerns)
        rng.shuffle(effects)
        shuffled = DecisionMap(
            id=dm.id,
            title=dm.title,
            system_name=dm.system_name,
            concerns=tuple(concerns),
            features=dm.features,
            effects=tuple(effects),
            goals=dm.goals,
            metadata=dict(dm.metadata),
        )
        assert canonicalize(shuffled) == canonicalize(dm)


class TestMatrixInvariants:
    def test_same_dimension_rejected(self):
        with pytest.raises(ValueError):
            DependencyMatrix("m", Dimension.TECHNICAL, Dimension.TECHNICAL)

    def test_cells_outside_headers_rejected(self):
        with pytest.raises(ValueError):
            DependencyMatrix(
                "m",
                Dimension.TECHNICAL,
                Dimension.SOCIAL,
                rows=("a",),
                cols=("b",),
                cells={("a", "zz"): DependencyValue.PLUS},
            )


class TestResolveWorkspace:
    def test_smart_lighting_bundle_binds(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        assert len(ws.decision_maps) == 1
        assert len(ws.sq_models) == 1
        assert len(ws.matrices) == 2
        dm = ws.decision_maps[0]
        assert dm.feature("customize_lighting") is not None
        assert any(
            e.source == "energy_savings" and e.target == "energy_costs"
            and e.effect_type is EffectType.POSITIVE
            for e in dm.effects
        )

    def test_empty_document_set(self):
        result = resolve_workspace([])
        assert result.ok
        assert result.diagnostics == []
        assert result.workspace.decision_maps == ()

    def test_deleted_concern_yields_single_e001(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        # Rename the well-being concern out of existence, keeping the effect.
        victim = "well_being"
        pruned = DecisionMap(
            id=dm.id,
            title=dm.title,
            system_name=dm.system_name,
            concerns=tuple(c for c in dm.concerns if c.id != victim),
            features=dm.features,
            effects=dm.effects,
            goals=dm.goals,
            metadata=dict(dm.metadata),
        )
        # Oracle: declared vs referenced id set difference.
        declared = {c.id for c in pruned.concerns} | {f.id for f in pruned.features}
        referenced = {e.target for e in pruned.effects} | {
            e.source for e in pruned.effects if "." not in e.source
        }
        dangling = referenced - declared
        assert dangling == {victim}

        result = resolve_workspace([pruned])
        assert not result.ok
        errors = [d for d in result.diagnostics if d.is_error]
        mentions = [d for d in errors if victim in d.message]
        assert len(mentions) == len(errors)  # nothing unrelated
        assert all(d.code == "E001" for d in errors)
        assert all(d.location is not None for d in errors)

    def test_duplicate_identifier_e002(self):
        concern = Concern("x", "X", ConcernKind.QUALITY_ATTRIBUTE, Dimension.SOCIAL, ImpactLevel.IMMEDIATE)
        dm = DecisionMap(id="m", title="T", system_name="S", concerns=(concern, concern))
        result = resolve_workspace([dm])
        assert not result.ok
        assert any(d.code == "E002" for d in result.diagnostics)

    def test_realized_by_needs_declared_element(self):
        dm = DecisionMap(
            id="m",
            title="T",
            system_name="S",
            features=(Feature("f", "F", realized_by=("ghost",)),),
        )
        result = resolve_workspace([dm])
        assert not result.ok
        assert any(d.code == "E001" and "ghost" in d.message for d in result.diagnostics)

    @given(decision_maps())
    @settings(max_examples=60)
    def test_reference_integrity(self, dm):
        # Independent traversal: referenced ids must be a subset of declared ids
        # whenever resolution succeeds.
        result = resolve_workspace([dm])
        if result.workspace is None:
            return
        declared = (
            {c.id for c in dm.concerns}
            | {f.id for f in dm.features}
            | {f"{f.id}.{v.id}" for f in dm.features for v in f.variants}
        )
        referenced = {e.source for e in dm.effects} | {e.target for e in dm.effects}
        referenced |= {c for g in dm.goals for c in g.linked_concerns}
        assert referenced <= declared
