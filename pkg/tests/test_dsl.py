"""Parsers and the canonical serializer: spec examples, round trips, totality."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    architectures,
    decision_maps,
    dependency_matrices,
    kpi_documents,
    sq_models,
)
from saftoolkit.archtrace import canonicalize_arch
from saftoolkit.dsl import (
    parse_arch,
    parse_dm,
    parse_kpi_document,
    parse_matrix,
    parse_sq,
    parse_workspace,
    serialize,
)
from saftoolkit.kpi import canonicalize_kpi_document
from saftoolkit.model import (
    Dimension,
    EffectType,
    canonicalize,
    canonicalize_matrix,
    canonicalize_sq,
)

SMART_LIGHTING_FRAGMENT = """
decision_map smart_lighting "Smart Lighting" system "Smart Lighting Platform" {
  feature customize_lighting "Customize lighting"
  qa energy_savings "Energy savings" dimension environmental impact immediate
  qa energy_costs "Energy costs" dimension economic impact enabling
  qa well_being "Well-being" dimension social impact enabling
  qa healthcare_cost "Healthcare cost" dimension economic impact systemic
  effect customize_lighting -> energy_savings positive
  effect energy_savings -> energy_costs positive
}
"""


class TestParseDm:
    def test_smart_lighting_fragment(self):
        result = parse_dm(SMART_LIGHTING_FRAGMENT, "sl.dm.saf")
        assert result.ok, [d.render() for d in result.diagnostics]
        dm = result.document
        assert len(dm.features) == 1
        assert len(dm.concerns) >= 4
        assert any(
            e.source == "energy_savings"
            and e.target == "energy_costs"
            and e.effect_type is EffectType.POSITIVE
            for e in dm.effects
        )

    def test_empty_map_valid(self):
        result = parse_dm('decision_map empty "E" system "S" { }', "e.dm.saf")
        assert result.ok
        assert result.document.concerns == ()
        assert result.document.effects == ()

    def test_enum_out_of_range_location(self):
        text = 'decision_map x "X" system "S" {\n  qa a "A" dimension technical impact fourth_order\n}'
        result = parse_dm(text, "x.dm.saf")
        assert not result.ok
        [diag] = [d for d in result.diagnostics if d.code == "E102"]
        assert diag.location.line == 2
        assert diag.location.column == text.splitlines()[1].index("fourth_order") + 1

    def test_unknown_keyword_e101(self):
        result = parse_dm('decision_map x "X" system "S" { banana a "A" }', "x.dm.saf")
        assert not result.ok
        assert any(d.code == "E101" for d in result.diagnostics)

    def test_self_effect_rejected(self):
        result = parse_dm(
            'decision_map x "X" system "S" {\n'
            '  qa a "A" dimension technical impact immediate\n'
            "  effect a -> a positive\n}",
            "x.dm.saf",
        )
        assert not result.ok
        assert any(d.code == "E100" for d in result.diagnostics)

    def test_variant_source_and_label(self):
        text = (
            'decision_map x "X" system "S" {\n'
            '  feature f "F" {\n    variant v1 "V1"\n  }\n'
            '  qa a "A" dimension technical impact immediate\n'
            '  effect f.v1 -> a negative label "measured -12%"\n}'
        )
        result = parse_dm(text, "x.dm.saf")
        assert result.ok, [d.render() for d in result.diagnostics]
        effect = result.document.effects[0]
        assert effect.source == "f.v1"
        assert effect.source_variant == ("f", "v1")
        assert effect.impact_label == "measured -12%"


class TestParseSq:
    def test_execution_time_row(self):
        text = (
            "qa_id,name,definition,source,dimensions,metrics\n"
            'execution_time,Execution Time,"the time it takes, per variant",benchmark2023,'
            'technical,"et_s:external:s:""per-variant execution time"""\n'
        )
        result = parse_sq(text, "zahori.sq.csv")
        assert result.ok, [d.render() for d in result.diagnostics]
        [entry] = result.document.entries
        assert entry.qa_id == "execution_time"
        assert entry.dimensions == frozenset({Dimension.TECHNICAL})
        [metric] = entry.metrics
        assert (metric.id, metric.metric_kind.value, metric.unit) == ("et_s", "external", "s")
        assert metric.description == "per-variant execution time"

    def test_header_only_is_empty_model(self):
        result = parse_sq("qa_id,name,definition,source,dimensions,metrics\n", "x.sq.csv")
        assert result.ok
        assert result.document.entries == ()

    def test_unknown_dimension_e102(self):
        text = (
            "qa_id,name,definition,source,dimensions,metrics\n"
            "qa_x,X,def,src,ecological,\n"
        )
        result = parse_sq(text, "x.sq.csv")
        assert not result.ok
        assert any(d.code == "E102" for d in result.diagnostics)

    def test_id_from_front_matter_and_stem(self):
        assert parse_sq("# id: custom\nqa_id,name,definition,source,dimensions,metrics\n", "a.sq.csv").document.id == "custom"
        assert parse_sq("qa_id,name,definition,source,dimensions,metrics\n", "proj.sq.csv").document.id == "proj"


class TestParseMatrix:
    def test_interoperability_modifiability_minus(self):
        text = (
            "# dims: technical x environmental\n"
            ",modifiability\n"
            "interoperability,-\n"
        )
        result = parse_matrix(text, file="m.matrix.csv")
        assert result.ok
        from saftoolkit.model import DependencyValue

        assert result.document.cell("interoperability", "modifiability") is DependencyValue.MINUS

    def test_blank_1x1_grid(self):
        text = "# dims: technical x social\n,trust\nefficiency,\n"
        result = parse_matrix(text, file="m.matrix.csv")
        assert result.ok
        assert result.document.cells == {}
        assert result.document.rows == ("efficiency",)

    def test_cell_out_of_range(self):
        text = "# dims: technical x social\n,trust\nefficiency,?\n"
        result = parse_matrix(text, file="m.matrix.csv")
        assert not result.ok
        assert any(d.code == "E102" for d in result.diagnostics)

    def test_ragged_grid(self):
        text = "# dims: technical x social\n,trust\nefficiency,+,extra\n"
        result = parse_matrix(text, file="m.matrix.csv")
        assert not result.ok
        assert any(d.code == "E100" and "ragged" in d.message for d in result.diagnostics)

    def test_dims_from_arguments_override(self):
        result = parse_matrix(",trust\nefficiency,+\n", Dimension.TECHNICAL, Dimension.SOCIAL)
        assert result.ok
        assert result.document.row_dimension is Dimension.TECHNICAL

    def test_missing_dims_is_error(self):
        result = parse_matrix(",trust\nefficiency,+\n")
        assert not result.ok

    def test_header_slug_normalization(self):
        text = "# dims: technical x social\n,Trust In System\nEfficiency,+\n"
        result = parse_matrix(text, file="m.matrix.csv")
        assert result.ok
        assert result.document.cell("efficiency", "trust_in_system") is not None


class TestRoundTrips:
    @given(decision_maps())
    @settings(max_examples=120, deadline=None)
    def test_dm_round_trip(self, dm):
        out = serialize(dm)
        reparsed = parse_dm(out, f"{dm.id}.dm.saf")
        assert reparsed.ok, (out, [d.render() for d in reparsed.diagnostics])
        assert reparsed.document == canonicalize(dm)

    @given(sq_models())
    @settings(max_examples=80, deadline=None)
    def test_sq_round_trip(self, model):
        out = serialize(model)
        reparsed = parse_sq(out, f"{model.id}.sq.csv")
        assert reparsed.ok, (out, [d.render() for d in reparsed.diagnostics])
        assert reparsed.document == canonicalize_sq(model)

    @given(dependency_matrices())
    @settings(max_examples=80, deadline=None)
    def test_matrix_round_trip(self, matrix):
        out = serialize(matrix)
        reparsed = parse_matrix(out, file=f"{matrix.id}.matrix.csv")
        assert reparsed.ok, (out, [d.render() for d in reparsed.diagnostics])
        assert reparsed.document == canonicalize_matrix(matrix)

    @given(st.data())
    @settings(max_examples=80, deadline=None)
    def test_kpi_round_trip(self, data):
        metric_pool = ("et_s", "ee_j", "cpu_util")
        concern_pool = ("qa_one", "qa_two")
        doc = data.draw(kpi_documents(metric_pool, concern_pool))
        out = serialize(doc)
        reparsed = parse_kpi_document(out, f"{doc.id}.kpi.saf")
        assert reparsed.ok, (out, [d.render() for d in reparsed.diagnostics])
        assert reparsed.document == canonicalize_kpi_document(doc)

    @given(architectures(concern_pool=("qa_one",), feature_pool=("feat_one", "feat_two")))
    @settings(max_examples=80, deadline=None)
    def test_arch_round_trip(self, arch):
        out = serialize(arch)
        reparsed = parse_arch(out, f"{arch.id}.arch.saf")
        assert reparsed.ok, (out, [d.render() for d in reparsed.diagnostics])
        assert reparsed.document == canonicalize_arch(arch)

    def test_smart_lighting_round_trip(self):
        dm = parse_dm(SMART_LIGHTING_FRAGMENT, "sl.dm.saf").document
        assert parse_dm(serialize(dm), "sl.dm.saf").document == canonicalize(dm)

    def test_empty_dm_round_trip(self):
        dm = parse_dm('decision_map empty "E" system "S" { }', "e.dm.saf").document
        assert parse_dm(serialize(dm), "e.dm.saf").document == canonicalize(dm)

    def test_serialize_deterministic(self):
        dm = parse_dm(SMART_LIGHTING_FRAGMENT, "sl.dm.saf").document
        assert serialize(dm) == serialize(dm)


class TestErrorLocality:
    @pytest.mark.parametrize(
        "text,needle",
        [
            ('decision_map x "X" system "S" {\n  qa a "A" dimension bogus impact immediate\n}', "bogus"),
            ('decision_map x "X" system "S" {\n  effect a positive -> b\n}', "positive"),
        ],
    )
    def test_diagnostic_points_into_offending_line(self, text, needle):
        result = parse_dm(text, "x.dm.saf")
        assert not result.ok
        diag = result.errors()[0]
        line_text = text.splitlines()[diag.location.line - 1]
        assert needle in line_text
        assert 1 <= diag.location.column <= len(line_text) + 1


class TestTotality:
    @given(st.binary(max_size=400))
    @settings(max_examples=300, deadline=None)
    def test_parsers_never_crash_on_bytes(self, blob):
        text = blob.decode("utf-8", errors="replace")
        for parse in (
            lambda t: parse_dm(t, "f.dm.saf"),
            lambda t: parse_sq(t, "f.sq.csv"),
            lambda t: parse_matrix(t, file="f.matrix.csv"),
            lambda t: parse_kpi_document(t, "f.kpi.saf"),
            lambda t: parse_arch(t, "f.arch.saf"),
        ):
            result = parse(t := text)
            assert (result.document is None) == any(d.is_error for d in result.diagnostics)

    @given(st.text(max_size=300))
    @settings(max_examples=200, deadline=None)
    def test_parsers_never_crash_on_text(self, text):
        for parse in (
            lambda t: parse_dm(t, "f.dm.saf"),
            lambda t: parse_kpi_document(t, "f.kpi.saf"),
            lambda t: parse_arch(t, "f.arch.saf"),
        ):
            parse(text)


class TestParseWorkspaceDir:
    def test_fixture_bundle(self, smart_lighting_dir):
        result = parse_workspace(smart_lighting_dir)
        assert result.ok, [d.render() for d in result.diagnostics]
        ws = result.document
        assert {m.id for m in ws.matrices} == {"env_eco", "soc_eco"}

    def test_empty_directory(self, tmp_path):
        result = parse_workspace(tmp_path)
        assert result.ok
        assert result.document.decision_maps == ()

    def test_broken_reference_carries_file_and_line(self, smart_lighting_dir, tmp_path):
        broken = (smart_lighting_dir / "smart_lighting.dm.saf").read_text()
        broken = broken.replace('qa well_being "Well-being" dimension social impact enabling\n', "")
        (tmp_path / "smart_lighting.dm.saf").write_text(broken)
        result = parse_workspace(tmp_path)
        assert not result.ok
        errors = [d for d in result.diagnostics if d.is_error]
        assert errors, "expected E001 diagnostics"
        for diag in errors:  # both dangling effect endpoints name the victim
            assert diag.code == "E001"
            assert "well_being" in diag.message
            assert diag.location is not None
            assert diag.location.file.endswith("smart_lighting.dm.saf")
            assert diag.location.line > 0

    def test_missing_directory(self, tmp_path):
        result = parse_workspace(tmp_path / "nope")
        assert not result.ok
