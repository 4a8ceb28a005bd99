"""Deterministic SVG and DOT emission for layout scenes.

Output is built from plain string pieces with fixed 4-decimal coordinates,
so the same scene always serializes to the same bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .graph import ClusterSummaryGraph, WeightedGraph
from .layout import LayoutScene

__all__ = ["render_svg", "export_dot", "DEFAULT_PALETTE"]

DEFAULT_PALETTE = (
    "#4878a8", "#e49444", "#d1615d", "#85b6b2", "#6a9f58",
    "#e7ca60", "#a87c9f", "#f1a2a9", "#967662", "#b8b0ac",
)

_LABEL_FONT_SIZE = 10.0


def _fmt(v: float) -> str:
    return f"{float(v):.4f}"


def _shade(value: float, vmax: float) -> str:
    """Grayscale fill for a u-matrix pixel: white at 0, dark at the max."""
    level = 255 if vmax <= 0 else 255 - int(round(200.0 * value / vmax))
    return f"#{level:02x}{level:02x}{level:02x}"


def _raster_rects(raster: np.ndarray, frame) -> list[str]:
    grid = np.asarray(raster, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("u-matrix raster must be a nonempty 2-D array")
    if not np.isfinite(grid).all() or (grid < 0).any():
        raise ValueError("u-matrix raster must be finite and nonnegative")
    rows, cols = grid.shape
    pw = frame.width / cols
    ph = frame.height / rows
    vmax = float(grid.max())
    out = ['<g class="umatrix">']
    for r in range(rows):
        y = frame.y + r * ph
        for c in range(cols):
            x = frame.x + c * pw
            fill = _shade(float(grid[r, c]), vmax)
            out.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(pw)}" '
                       f'height="{_fmt(ph)}" fill="{fill}"/>')
    out.append("</g>")
    return out


def render_svg(scene: LayoutScene, *, labels: bool = True,
               label_threshold: int = 3, umatrix=None,
               palette=DEFAULT_PALETTE) -> bytes:
    """Serialize a scene to a standalone SVG document.

    Layer order is background, u-matrix raster, cell borders, edges, glyphs,
    labels. Glyphs are filled from ``palette`` cycled by cluster id. When
    ``labels`` is on, an item gets a text label only if its cluster holds at
    most ``label_threshold`` vertices, which keeps names readable by marking
    just the small clusters.

    Args:
        scene: what to draw.
        labels: emit text labels for small-cluster items.
        label_threshold: largest cluster size that still gets labels.
        umatrix: optional 2-D array drawn as a grayscale raster over the
            whole frame; pass an upsampled u-matrix for a smooth background.
        palette: cycle of glyph fill colors.

    Returns:
        UTF-8 bytes of the SVG document.
    """
    if label_threshold < 0:
        raise ValueError("label_threshold must be nonnegative")
    palette = tuple(palette)
    if not palette:
        raise ValueError("palette must not be empty")
    fr = scene.frame
    pos = scene.positions

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(fr.width)}" height="{_fmt(fr.height)}" '
        f'viewBox="{_fmt(fr.x)} {_fmt(fr.y)} {_fmt(fr.width)} {_fmt(fr.height)}">',
        f'<rect x="{_fmt(fr.x)}" y="{_fmt(fr.y)}" width="{_fmt(fr.width)}" '
        f'height="{_fmt(fr.height)}" fill="#ffffff"/>',
    ]
    if umatrix is not None:
        parts.extend(_raster_rects(umatrix, fr))
    if scene.cell_regions is not None:
        parts.append('<g class="cells" fill="none" stroke="#bbbbbb" '
                     'stroke-width="1">')
        for cell in scene.cell_regions:
            parts.append(f'<rect x="{_fmt(cell.x)}" y="{_fmt(cell.y)}" '
                         f'width="{_fmt(cell.width)}" height="{_fmt(cell.height)}"/>')
        parts.append("</g>")
    if scene.edges.shape[0]:
        parts.append('<g class="edges" stroke="#777777" stroke-opacity="0.6">')
        for (a, b), w in zip(scene.edges.tolist(), scene.edge_widths.tolist()):
            parts.append(f'<line x1="{_fmt(pos[a, 0])}" y1="{_fmt(pos[a, 1])}" '
                         f'x2="{_fmt(pos[b, 0])}" y2="{_fmt(pos[b, 1])}" '
                         f'stroke-width="{_fmt(w)}"/>')
        parts.append("</g>")
    parts.append('<g class="glyphs" stroke="#333333" stroke-width="1">')
    for i in range(scene.num_items):
        fill = palette[int(scene.item_groups[i]) % len(palette)]
        parts.append(f'<circle cx="{_fmt(pos[i, 0])}" cy="{_fmt(pos[i, 1])}" '
                     f'r="{_fmt(scene.radii[i])}" fill="{fill}"/>')
    parts.append("</g>")
    if labels:
        group_sizes = scene.group_sizes
        texts = []
        for i in range(scene.num_items):
            if group_sizes[scene.item_groups[i]] > label_threshold:
                continue
            x, y = pos[i, 0], pos[i, 1] - scene.radii[i] - 2.0
            texts.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" '
                         f'text-anchor="middle">{escape(scene.item_labels[i])}</text>')
        if texts:
            parts.append(f'<g class="labels" font-family="sans-serif" '
                         f'font-size="{_fmt(_LABEL_FONT_SIZE)}" fill="#111111">')
            parts.extend(texts)
            parts.append("</g>")
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _scene_node_attrs(scene: LayoutScene, i: int) -> list[str]:
    x, y = scene.positions[i]
    # pos in drawing units, width in the 72-per-unit convention viewers expect
    return [f'pos="{_fmt(x)},{_fmt(y)}!"',
            f"width={_fmt(2.0 * scene.radii[i] / 72.0)}"]


def export_dot(obj, scene: LayoutScene | None = None) -> bytes:
    """Serialize a summary graph or a weighted graph as DOT text.

    Edge weights are written as ``weight`` attributes. When ``scene`` is
    given, node statements carry pinned positions and widths taken from it,
    so external tools can reproduce the layout.
    """
    lines = []
    if isinstance(obj, ClusterSummaryGraph):
        if scene is not None and scene.num_items != obj.num_clusters:
            raise ValueError("scene does not match the summary graph")
        lines.append("graph clusters {")
        lines.append("  node [shape=circle];")
        for i, node in enumerate(obj.nodes):
            attrs = [f"vertices={node.vertex_count}",
                     f"intra={_fmt(node.intra_weight)}"]
            if scene is not None:
                attrs.extend(_scene_node_attrs(scene, i))
            lines.append(f"  {node.cluster} [{', '.join(attrs)}];")
        for e in obj.edges:
            lines.append(f"  {e.a} -- {e.b} [weight={_fmt(e.weight)}];")
    elif isinstance(obj, WeightedGraph):
        if scene is not None and scene.num_items != obj.num_vertices:
            raise ValueError("scene does not match the graph")
        lines.append("graph vertices {")
        for i, label in enumerate(obj.labels):
            attrs = []
            if scene is not None:
                attrs.extend(_scene_node_attrs(scene, i))
            suffix = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  {_quote(label)}{suffix};")
        for i, j, w in obj.edges():
            lines.append(f"  {_quote(obj.labels[i])} -- {_quote(obj.labels[j])} "
                         f"[weight={_fmt(w)}];")
    else:
        raise TypeError(
            f"expected ClusterSummaryGraph or WeightedGraph, got {type(obj).__name__}")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
