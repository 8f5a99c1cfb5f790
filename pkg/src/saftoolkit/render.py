"""Deterministic band layout and export of decision maps to SVG and
diagrams.net (draw.io) XML.

Four vertical bands left to right: features, then the three impact levels.
Nodes are colored by sustainability dimension, effect arrows styled by type
(positive solid '+', negative solid '-', undecided dashed '?'). Rendering is
a pure function of the canonical map and the config: no timestamps, no
randomness.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .model import DecisionMap, EffectType, canonicalize

BAND_NAMES = ("features", "immediate", "enabling", "systemic")

DEFAULT_COLORS = {
    "technical": "#D4E1F5",
    "environmental": "#D5E8D4",
    "economic": "#F8CECC",
    "social": "#FFFF99",
    "feature": "#F5F5F5",
    "band": "#FAFAFA",
    "band_stroke": "#CCCCCC",
    "stroke": "#333333",
    "edge": "#555555",
}


@dataclass(frozen=True)
class RenderConfig:
    node_width: int = 160
    node_height: int = 56
    hgap: int = 64
    vgap: int = 24
    band_padding: int = 24
    top: int = 64
    margin: int = 20
    colors: dict = field(default_factory=lambda: dict(DEFAULT_COLORS))

    @property
    def band_width(self) -> int:
        return self.node_width + 2 * self.band_padding


def load_render_config(text: str) -> RenderConfig:
    """INI-style render config with [layout] and [colors] sections."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    kwargs: dict = {}
    if parser.has_section("layout"):
        for key in ("node_width", "node_height", "hgap", "vgap", "band_padding", "top", "margin"):
            if parser.has_option("layout", key):
                kwargs[key] = parser.getint("layout", key)
    colors = dict(DEFAULT_COLORS)
    if parser.has_section("colors"):
        colors.update(dict(parser.items("colors")))
    return RenderConfig(colors=colors, **kwargs)


@dataclass(frozen=True)
class Band:
    name: str
    x0: float
    x1: float


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def cx(self) -> float:
        return self.x + self.w / 2

    @property
    def cy(self) -> float:
        return self.y + self.h / 2


@dataclass(frozen=True)
class EdgeRoute:
    source: str  # node key
    target: str
    effect_index: int
    points: tuple


@dataclass(frozen=True)
class Layout:
    bands: tuple
    nodes: dict  # node key -> Rect
    edges: tuple
    width: float
    height: float


def node_key(kind: str, element_id: str) -> str:
    return f"{kind}:{element_id}"


def _source_key(dm: DecisionMap, ref: str) -> str:
    if "." in ref:
        return node_key("variant", ref)
    if dm.concern(ref) is not None:
        return node_key("concern", ref)
    return node_key("feature", ref)


def _target_key(dm: DecisionMap, ref: str) -> str:
    if dm.concern(ref) is not None:
        return node_key("concern", ref)
    return node_key("feature", ref)


def layout_dm(dm: DecisionMap, config: RenderConfig | None = None) -> Layout:
    """Pure banded grid layout over the canonical map."""
    cfg = config or RenderConfig()
    dm = canonicalize(dm)

    bands = tuple(
        Band(
            name,
            cfg.margin + i * (cfg.band_width + cfg.hgap),
            cfg.margin + i * (cfg.band_width + cfg.hgap) + cfg.band_width,
        )
        for i, name in enumerate(BAND_NAMES)
    )

    rows: dict[str, list[str]] = {name: [] for name in BAND_NAMES}
    for feature in dm.features:
        rows["features"].append(node_key("feature", feature.id))
        for variant in feature.variants:
            rows["features"].append(node_key("variant", f"{feature.id}.{variant.id}"))
    for concern in dm.concerns:  # canonical order: impact, dimension, id
        rows[concern.impact.value].append(node_key("concern", concern.id))

    nodes: dict[str, Rect] = {}
    for band in bands:
        for row, key in enumerate(rows[band.name]):
            nodes[key] = Rect(
                band.x0 + cfg.band_padding,
                cfg.top + row * (cfg.node_height + cfg.vgap),
                cfg.node_width,
                cfg.node_height,
            )

    band_index = {band.name: i for i, band in enumerate(bands)}

    def band_of(key: str) -> int:
        if key.startswith("concern:"):
            concern = dm.concern(key.split(":", 1)[1])
            return band_index[concern.impact.value]
        return 0

    edges = []
    for index, effect in enumerate(dm.effects):
        src = _source_key(dm, effect.source)
        tgt = _target_key(dm, effect.target)
        if src not in nodes or tgt not in nodes:
            continue
        a, b = nodes[src], nodes[tgt]
        sb, tb = band_of(src), band_of(tgt)
        if tb > sb:
            gx = bands[tb].x0 - cfg.hgap / 2
            points = ((a.x + a.w, a.cy), (gx, a.cy), (gx, b.cy), (b.x, b.cy))
        elif tb < sb:
            gx = bands[tb].x1 + cfg.hgap / 2
            points = ((a.x, a.cy), (gx, a.cy), (gx, b.cy), (b.x + b.w, b.cy))
        else:
            gx = bands[sb].x1 + cfg.hgap / 4
            points = ((a.x + a.w, a.cy), (gx, a.cy), (gx, b.cy), (b.x + b.w, b.cy))
        edges.append(EdgeRoute(src, tgt, index, points))

    max_rows = max((len(keys) for keys in rows.values()), default=0)
    height = cfg.top + max(max_rows, 1) * (cfg.node_height + cfg.vgap) + cfg.margin
    width = bands[-1].x1 + cfg.margin
    return Layout(bands=bands, nodes=nodes, edges=tuple(edges), width=width, height=height)


def layout_to_json(layout: Layout) -> dict:
    return {
        "width": layout.width,
        "height": layout.height,
        "bands": [{"name": b.name, "x0": b.x0, "x1": b.x1} for b in layout.bands],
        "nodes": {
            key: {"x": r.x, "y": r.y, "w": r.w, "h": r.h} for key, r in layout.nodes.items()
        },
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "points": [list(p) for p in e.points],
            }
            for e in layout.edges
        ],
    }


_TYPE_GLYPH = {
    EffectType.POSITIVE: "+",
    EffectType.NEGATIVE: "−",
    EffectType.UNDECIDED: "?",
}


def _node_label(dm: DecisionMap, key: str) -> str:
    kind, _, element_id = key.partition(":")
    if kind == "concern":
        return dm.concern(element_id).name
    if kind == "feature":
        return dm.feature(element_id).name
    feature_id, _, variant_id = element_id.partition(".")
    feature = dm.feature(feature_id)
    for variant in feature.variants:
        if variant.id == variant_id:
            return variant.name
    return element_id


def _node_fill(dm: DecisionMap, key: str, colors: dict) -> str:
    if key.startswith("concern:"):
        return colors[dm.concern(key.split(":", 1)[1]).dimension.value]
    return colors["feature"]


def render_svg(layout: Layout, dm: DecisionMap, config: RenderConfig | None = None) -> str:
    """Well-formed SVG 1.1; byte-identical across runs on the same input."""
    cfg = config or RenderConfig()
    dm = canonicalize(dm)
    colors = cfg.colors
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{layout.width:g}" height="{layout.height:g}" '
        f'viewBox="0 0 {layout.width:g} {layout.height:g}">',
        "  <defs>",
        f'    <marker id="arrow" viewBox="0 -5 10 10" refX="9" refY="0" markerWidth="7"'
        f' markerHeight="7" orient="auto"><path d="M0,-5L10,0L0,5" fill="{colors["edge"]}"/></marker>',
        "  </defs>",
        f"  <title>{escape(dm.title)}</title>",
    ]
    for band in layout.bands:
        out.append(
            f'  <rect class="band" x="{band.x0:g}" y="{cfg.margin:g}"'
            f' width="{band.x1 - band.x0:g}" height="{layout.height - 2 * cfg.margin:g}"'
            f' fill="{colors["band"]}" stroke="{colors["band_stroke"]}"/>'
        )
        out.append(
            f'  <text class="band-title" x="{(band.x0 + band.x1) / 2:g}" y="{cfg.margin + 24:g}"'
            f' text-anchor="middle" font-family="sans-serif" font-size="14"'
            f' font-weight="bold">{escape(band.name)}</text>'
        )
    for index, edge in enumerate(layout.edges):
        effect = dm.effects[edge.effect_index]
        dashed = ' stroke-dasharray="6,4"' if effect.effect_type is EffectType.UNDECIDED else ""
        path = "M " + " L ".join(f"{x:g},{y:g}" for x, y in edge.points)
        out.append(
            f'  <path class="effect" d="{path}" fill="none" stroke="{colors["edge"]}"'
            f' stroke-width="1.5"{dashed} marker-end="url(#arrow)"/>'
        )
        mid_x, mid_y = edge.points[1][0], (edge.points[1][1] + edge.points[2][1]) / 2
        out.append(
            f'  <text class="effect-glyph" x="{mid_x + 6:g}" y="{mid_y - 4:g}"'
            f' font-family="sans-serif" font-size="13"'
            f' font-weight="bold">{escape(_TYPE_GLYPH[effect.effect_type])}</text>'
        )
        if effect.impact_label is not None:
            out.append(
                f'  <text class="effect-label" x="{mid_x + 6:g}" y="{mid_y + 12:g}"'
                f' font-family="sans-serif" font-size="11"'
                f' font-style="italic">{escape(effect.impact_label)}</text>'
            )
    for key, rect in layout.nodes.items():
        fill = _node_fill(dm, key, colors)
        rx = 10 if key.startswith(("feature:", "variant:")) else 4
        out.append(
            f'  <rect class="node" x="{rect.x:g}" y="{rect.y:g}" width="{rect.w:g}"'
            f' height="{rect.h:g}" rx="{rx}" fill="{fill}" stroke="{colors["stroke"]}"/>'
        )
        out.append(
            f'  <text class="node-label" x="{rect.cx:g}" y="{rect.cy + 4:g}"'
            f' text-anchor="middle" font-family="sans-serif"'
            f' font-size="12">{escape(_node_label(dm, key))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _cell_id(key: str) -> str:
    return key.replace(":", "__").replace(".", "_")


def export_drawio(layout: Layout, dm: DecisionMap, config: RenderConfig | None = None) -> str:
    """draw.io (mxGraphModel) XML with one mxCell per node and edge; element
    ids derive from model ids so re-exports diff clean."""
    cfg = config or RenderConfig()
    dm = canonicalize(dm)
    colors = cfg.colors
    cells: list[str] = ['<mxCell id="0"/>', '<mxCell id="1" parent="0"/>']
    for band in layout.bands:
        style = (
            f"rounded=0;fillColor={colors['band']};strokeColor={colors['band_stroke']};"
            "verticalAlign=top;fontStyle=1;html=1;"
        )
        cells.append(
            f'<mxCell id="band__{band.name}" value={quoteattr(band.name)} style="{style}"'
            f' vertex="1" parent="1"><mxGeometry x="{band.x0:g}" y="{cfg.margin:g}"'
            f' width="{band.x1 - band.x0:g}" height="{layout.height - 2 * cfg.margin:g}"'
            f' as="geometry"/></mxCell>'
        )
    for key, rect in layout.nodes.items():
        fill = _node_fill(dm, key, colors)
        rounded = 1 if key.startswith(("feature:", "variant:")) else 0
        style = f"rounded={rounded};whiteSpace=wrap;html=1;fillColor={fill};strokeColor={colors['stroke']};"
        cells.append(
            f'<mxCell id="{_cell_id(key)}" value={quoteattr(_node_label(dm, key))}'
            f' style="{style}" vertex="1" parent="1"><mxGeometry x="{rect.x:g}"'
            f' y="{rect.y:g}" width="{rect.w:g}" height="{rect.h:g}" as="geometry"/></mxCell>'
        )
    for edge in layout.edges:
        effect = dm.effects[edge.effect_index]
        dashed = "dashed=1;" if effect.effect_type is EffectType.UNDECIDED else "dashed=0;"
        style = f"endArrow=block;html=1;rounded=0;{dashed}strokeColor={colors['edge']};"
        label = _TYPE_GLYPH[effect.effect_type]
        if effect.impact_label is not None:
            label += f" {effect.impact_label}"
        edge_id = (
            f"effect__{_cell_id(edge.source)}__{_cell_id(edge.target)}"
            f"__{effect.effect_type.value}"
        )
        cells.append(
            f'<mxCell id="{edge_id}" value={quoteattr(label)} style="{style}" edge="1"'
            f' parent="1" source="{_cell_id(edge.source)}" target="{_cell_id(edge.target)}">'
            f'<mxGeometry relative="1" as="geometry"/></mxCell>'
        )
    body = "".join(cells)
    return (
        '<mxfile host="saf-toolkit">'
        f"<diagram id=\"dm__{dm.id}\" name={quoteattr(dm.title)}>"
        f'<mxGraphModel dx="0" dy="0" grid="0" page="0"><root>{body}</root></mxGraphModel>'
        "</diagram></mxfile>"
    )
