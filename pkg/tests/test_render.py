"""Layout and export: band placement, determinism, containment, count oracles."""

from __future__ import annotations

import random
import xml.etree.ElementTree as ET

from hypothesis import given, settings

from conftest import decision_maps, load_fixture_workspace
from saftoolkit.dsl import parse_dm
from saftoolkit.model import DecisionMap, canonicalize
from saftoolkit.render import (
    BAND_NAMES,
    RenderConfig,
    export_drawio,
    layout_dm,
    layout_to_json,
    load_render_config,
    render_svg,
)

SVG_NS = "{http://www.w3.org/2000/svg}"


def _svg_tree(text: str) -> ET.Element:
    return ET.fromstring(text)


def _nodes_with_class(root: ET.Element, cls: str) -> list[ET.Element]:
    return [el for el in root.iter() if el.get("class") == cls]


class TestLayout:
    def test_smart_lighting_band_placement(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        layout = layout_dm(dm)
        bands = {band.name: band for band in layout.bands}
        assert [band.name for band in layout.bands] == list(BAND_NAMES)

        def band_of(key: str) -> str:
            rect = layout.nodes[key]
            for band in layout.bands:
                if band.x0 <= rect.x and rect.x + rect.w <= band.x1:
                    return band.name
            raise AssertionError(f"{key} outside every band")

        assert band_of("feature:customize_lighting") == "features"
        assert band_of("concern:energy_savings") == "immediate"
        assert band_of("concern:energy_costs") == "enabling"
        assert band_of("concern:well_being") == "enabling"
        assert band_of("concern:healthcare_cost") == "systemic"

    def test_empty_dm_four_empty_bands(self):
        dm = parse_dm('decision_map e "E" system "S" { }', "e.dm.saf").document
        layout = layout_dm(dm)
        assert len(layout.bands) == 4
        assert layout.nodes == {}
        assert layout.edges == ()

    def test_permuted_input_identical_layout(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        expected = layout_dm(dm)
        rng = random.Random(3)
        for _ in range(100):
            concerns, effects = list(dm.concerns), list(dm.effects)
            rng.shuffle(concerns)
            rng.shuffle(effects)
            permuted = DecisionMap(
                id=dm.id,
                title=dm.title,
                system_name=dm.system_name,
                concerns=tuple(concerns),
                features=dm.features,
                effects=tuple(effects),
                goals=dm.goals,
                metadata=dict(dm.metadata),
            )
            assert layout_dm(permuted) == expected

    @given(decision_maps())
    @settings(max_examples=60, deadline=None)
    def test_containment_and_non_overlap(self, dm):
        layout = layout_dm(dm)
        rects = list(layout.nodes.items())
        bands = {band.name: band for band in layout.bands}
        for key, rect in rects:
            if key.startswith("concern:"):
                concern = canonicalize(dm).concern(key.split(":", 1)[1])
                band = bands[concern.impact.value]
            else:
                band = bands["features"]
            assert band.x0 <= rect.x and rect.x + rect.w <= band.x1
        for i, (key_a, a) in enumerate(rects):
            for key_b, b in rects[i + 1:]:
                disjoint = (
                    a.x + a.w <= b.x or b.x + b.w <= a.x or a.y + a.h <= b.y or b.y + b.h <= a.y
                )
                assert disjoint, f"{key_a} overlaps {key_b}"

    def test_layout_json_shape(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        payload = layout_to_json(layout_dm(ws.decision_maps[0]))
        assert set(payload) == {"width", "height", "bands", "nodes", "edges"}
        assert len(payload["bands"]) == 4


class TestSvg:
    def test_count_oracle(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        svg = render_svg(layout_dm(dm), dm)
        root = _svg_tree(svg)  # well-formed XML or this raises
        effects = _nodes_with_class(root, "effect")
        nodes = _nodes_with_class(root, "node")
        assert len(effects) == len(dm.effects)
        assert all(p.get("marker-end") for p in effects)
        assert len(nodes) == len(dm.concerns) + len(dm.features)

    def test_empty_dm_only_band_frames(self):
        dm = parse_dm('decision_map e "E" system "S" { }', "e.dm.saf").document
        svg = render_svg(layout_dm(dm), dm)
        root = _svg_tree(svg)
        assert len(_nodes_with_class(root, "band")) == 4
        assert _nodes_with_class(root, "node") == []
        assert _nodes_with_class(root, "effect") == []

    def test_byte_identical_across_runs(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        assert render_svg(layout_dm(dm), dm) == render_svg(layout_dm(dm), dm)

    def test_dimension_colors_applied(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        svg = render_svg(layout_dm(dm), dm)
        assert "#D5E8D4" in svg  # environmental
        assert "#F8CECC" in svg  # economic
        assert "#FFFF99" in svg  # social

    def test_undecided_dashed_and_glyphs(self, conflict_dir):
        ws = load_fixture_workspace(conflict_dir)
        dm = ws.decision_maps[0]
        svg = render_svg(layout_dm(dm), dm)
        assert "stroke-dasharray" in svg
        assert ">?</text>" in svg

    def test_impact_label_rendered(self):
        dm = parse_dm(
            'decision_map x "X" system "S" {\n'
            '  qa a_qa "A" dimension technical impact immediate\n'
            '  qa b_qa "B" dimension social impact immediate\n'
            '  effect a_qa -> b_qa positive label "measured +12%"\n}',
            "x.dm.saf",
        ).document
        svg = render_svg(layout_dm(dm), dm)
        assert "measured +12%" in svg

    @given(decision_maps())
    @settings(max_examples=40, deadline=None)
    def test_every_effect_appears_once(self, dm):
        svg = render_svg(layout_dm(dm), dm)
        root = _svg_tree(svg)
        assert len(_nodes_with_class(root, "effect")) == len(dm.effects)


class TestDrawio:
    def test_count_oracle(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        xml = export_drawio(layout_dm(dm), dm)
        root = ET.fromstring(xml)
        cells = list(root.iter("mxCell"))
        node_cells = [
            c for c in cells if (c.get("id") or "").startswith(("concern__", "feature__", "variant__"))
        ]
        edge_cells = [c for c in cells if c.get("edge") == "1"]
        assert len(node_cells) == len(dm.concerns) + len(dm.features)
        assert len(edge_cells) == len(dm.effects)
        assert all(c.get("vertex") == "1" for c in node_cells)

    def test_empty_dm_minimal_document_with_bands(self):
        dm = parse_dm('decision_map e "E" system "S" { }', "e.dm.saf").document
        xml = export_drawio(layout_dm(dm), dm)
        root = ET.fromstring(xml)
        band_cells = [c for c in root.iter("mxCell") if (c.get("id") or "").startswith("band__")]
        assert len(band_cells) == 4

    def test_ids_stable_across_runs(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        assert export_drawio(layout_dm(dm), dm) == export_drawio(layout_dm(dm), dm)

    def test_geometry_comes_from_layout(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        layout = layout_dm(dm)
        root = ET.fromstring(export_drawio(layout, dm))
        rect = layout.nodes["concern:energy_savings"]
        [cell] = [c for c in root.iter("mxCell") if c.get("id") == "concern__energy_savings"]
        geometry = cell.find("mxGeometry")
        assert float(geometry.get("x")) == rect.x
        assert float(geometry.get("y")) == rect.y


class TestRenderConfig:
    def test_load_overrides(self):
        cfg = load_render_config(
            "[layout]\nnode_width = 200\n\n[colors]\ntechnical = #123456\n"
        )
        assert cfg.node_width == 200
        assert cfg.colors["technical"] == "#123456"
        assert cfg.colors["social"] == "#FFFF99"  # defaults retained

    def test_custom_config_changes_output(self, smart_lighting_dir):
        ws = load_fixture_workspace(smart_lighting_dir)
        dm = ws.decision_maps[0]
        cfg = load_render_config("[colors]\nenvironmental = #ABCDEF\n")
        svg = render_svg(layout_dm(dm, cfg), dm, cfg)
        assert "#ABCDEF" in svg
