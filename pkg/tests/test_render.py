import xml.etree.ElementTree as ET

import numpy as np
import pytest

from graphsom.graph import Partition, WeightedGraph, summary_graph
from graphsom.layout import LayoutScene, Rect, force_directed_layout, som_map_scene
from graphsom.render import export_dot, render_svg
from graphsom.som import SomGrid, SomModel, som_partition
from graphgen import from_weights, random_graph, two_cliques


def uniform_model(grid, assignment):
    assignment = np.asarray(assignment, dtype=np.int64)
    n = assignment.size
    gamma = np.full((grid.num_units, n), 1.0 / n)
    return SomModel(grid, gamma, assignment, np.zeros(1))


def simple_scene(group_sizes=(2, 5), labels=("a", "b")):
    return LayoutScene(
        positions=[[20.0, 30.0], [70.0, 40.0]],
        radii=[4.0, 8.0],
        edges=[[0, 1]],
        edge_widths=[2.0],
        frame=Rect(0.0, 0.0, 100.0, 100.0),
        item_labels=labels,
        item_groups=[0, 1],
        group_sizes=group_sizes,
    )


def svg_elements(svg, local_name):
    root = ET.fromstring(svg.decode("utf-8"))
    return [el for el in root.iter() if el.tag.split("}")[-1] == local_name]


# tiny DOT reader: enough grammar to check the emitted statements hold up

def tokenize_dot(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == '"':
            j = i + 1
            buf = []
            while text[j] != '"':
                if text[j] == "\\":
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            tokens.append(("str", "".join(buf)))
            i = j + 1
        elif text[i:i + 2] == "--":
            tokens.append(("--", "--"))
            i += 2
        elif ch in "{}[];,=":
            tokens.append((ch, ch))
            i += 1
        else:
            j = i
            while (j < len(text) and not text[j].isspace()
                   and text[j] not in '{}[];,="' and text[j:j + 2] != "--"):
                j += 1
            tokens.append(("id", text[i:j]))
            i = j
    return tokens


def parse_dot(data):
    """Parse `graph name { stmts }` and return (name, node ids, edges)."""
    toks = tokenize_dot(data.decode("utf-8"))
    pos = 0

    def take(kind=None):
        nonlocal pos
        assert pos < len(toks), "unexpected end of input"
        tok = toks[pos]
        if kind is not None:
            assert tok[0] == kind, f"expected {kind}, got {tok}"
        pos += 1
        return tok

    def take_value():
        tok = take()
        assert tok[0] in ("id", "str"), f"expected a value, got {tok}"
        return tok[1]

    def skip_attrs():
        if toks[pos][0] != "[":
            return {}
        take("[")
        attrs = {}
        while toks[pos][0] != "]":
            key = take_value()
            take("=")
            attrs[key] = take_value()
            if toks[pos][0] == ",":
                take(",")
        take("]")
        return attrs

    kw = take("id")
    assert kw[1] == "graph"
    name = take_value()
    take("{")
    nodes, edges = {}, []
    while toks[pos][0] != "}":
        first = take_value()
        if toks[pos][0] == "--":
            take("--")
            second = take_value()
            edges.append((first, second, skip_attrs()))
        else:
            nodes[first] = skip_attrs()
        take(";")
    take("}")
    assert pos == len(toks)
    return name, nodes, edges


class TestRenderSvg:
    def test_well_formed_and_deterministic(self):
        scene = simple_scene()
        svg = render_svg(scene)
        assert svg.startswith(b'<?xml version="1.0"')
        ET.fromstring(svg.decode("utf-8"))
        assert render_svg(scene) == svg

    def test_circles_only_when_no_edges(self):
        scene = LayoutScene(
            positions=[[10.0, 10.0], [30.0, 30.0]],
            radii=[3.0, 3.0],
            edges=np.empty((0, 2), dtype=np.int64),
            edge_widths=[],
            frame=Rect(0, 0, 50, 50),
            item_labels=("x", "y"),
            item_groups=[0, 1],
            group_sizes=[4, 4],
        )
        svg = render_svg(scene)
        assert b"<line" not in svg
        assert len(svg_elements(svg, "circle")) == 2

    def test_raster_precedes_glyphs(self):
        g = two_cliques(4)
        model = uniform_model(SomGrid(1, 2), np.repeat([0, 1], 4))
        sg = summary_graph(g, som_partition(model))
        scene = som_map_scene(model, sg)
        svg = render_svg(scene, umatrix=np.array([[0.0, 1.0]]))
        assert svg.index(b'class="umatrix"') < svg.index(b'class="cells"')
        assert svg.index(b'class="cells"') < svg.index(b'class="glyphs"')

    def test_raster_shades(self):
        scene = simple_scene()
        svg = render_svg(scene, umatrix=np.array([[0.0, 1.0]]))
        assert svg.count(b'fill="#ffffff"') >= 2  # background plus the 0 pixel
        assert b'fill="#373737"' in svg

    def test_flat_raster_is_white(self):
        scene = simple_scene()
        svg = render_svg(scene, umatrix=np.zeros((2, 2)))
        rects = [el for el in svg_elements(svg, "rect")]
        fills = {el.get("fill") for el in rects if el.get("fill")}
        assert fills == {"#ffffff"}

    def test_labels_only_for_small_clusters(self):
        svg = render_svg(simple_scene(group_sizes=(2, 5)))
        texts = svg_elements(svg, "text")
        assert [t.text for t in texts] == ["a"]
        svg_all = render_svg(simple_scene(group_sizes=(2, 5)), label_threshold=10)
        assert len(svg_elements(svg_all, "text")) == 2
        svg_none = render_svg(simple_scene(group_sizes=(2, 5)), labels=False)
        assert b"<text" not in svg_none

    def test_labels_escaped(self):
        svg = render_svg(simple_scene(labels=("a<b&c", "d")))
        assert b"a&lt;b&amp;c" in svg
        assert b"<b&c" not in svg
        assert svg_elements(svg, "text")[0].text == "a<b&c"

    def test_edge_widths_written(self):
        svg = render_svg(simple_scene())
        lines = svg_elements(svg, "line")
        assert lines[0].get("stroke-width") == "2.0000"

    def test_option_validation(self):
        with pytest.raises(ValueError, match="threshold"):
            render_svg(simple_scene(), label_threshold=-1)
        with pytest.raises(ValueError, match="palette"):
            render_svg(simple_scene(), palette=())
        with pytest.raises(ValueError, match="2-D"):
            render_svg(simple_scene(), umatrix=np.zeros(4))
        with pytest.raises(ValueError, match="nonnegative"):
            render_svg(simple_scene(), umatrix=np.array([[-1.0, 0.0]]))

    def test_layout_to_svg_roundtrip_deterministic(self):
        g = random_graph(30, rng=0)
        sg = summary_graph(g, Partition(np.arange(30) % 5, 5))
        frame = Rect(0, 0, 300, 200)
        first = render_svg(force_directed_layout(sg, 150, frame, seed=6))
        second = render_svg(force_directed_layout(sg, 150, frame, seed=6))
        assert first == second


class TestExportDot:
    def summary_fixture(self):
        g = two_cliques(10, bridge=2.0)
        return summary_graph(g, Partition(np.repeat([0, 1], 10), 2))

    def test_summary_statements(self):
        dot = export_dot(self.summary_fixture())
        name, nodes, edges = parse_dot(dot)
        assert name == "clusters"
        assert set(nodes) >= {"0", "1"}
        assert edges == [("0", "1", {"weight": "2.0000"})]
        assert nodes["0"]["vertices"] == "10"

    def test_scene_positions_embedded(self):
        sg = self.summary_fixture()
        scene = force_directed_layout(sg, 50, Rect(0, 0, 100, 100), seed=0)
        name, nodes, edges = parse_dot(export_dot(sg, scene))
        pos = nodes["0"]["pos"]
        assert pos.endswith("!")
        x, y = pos[:-1].split(",")
        assert float(x) == pytest.approx(scene.positions[0, 0], abs=1e-3)
        assert float(y) == pytest.approx(scene.positions[0, 1], abs=1e-3)
        assert "width" in nodes["0"]

    def test_weighted_graph_nodes_quoted(self):
        w = np.array([[0.0, 2.5], [2.5, 0.0]])
        g = WeightedGraph(("first name", 'piece "quoted"'), w)
        name, nodes, edges = parse_dot(export_dot(g))
        assert name == "vertices"
        assert set(nodes) == {"first name", 'piece "quoted"'}
        assert edges == [("first name", 'piece "quoted"', {"weight": "2.5000"})]

    def test_special_characters_roundtrip(self):
        tricky = ("back\\slash", "qu\"ote", "semi;colon", "brace{x}")
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        g = WeightedGraph(tricky, w)
        name, nodes, edges = parse_dot(export_dot(g))
        assert set(nodes) == set(tricky)

    def test_isolated_vertices_still_listed(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        g = from_weights(w)
        name, nodes, edges = parse_dot(export_dot(g))
        assert set(nodes) == {"v0", "v1", "v2"}
        assert len(edges) == 1

    def test_scene_mismatch_rejected(self):
        sg = self.summary_fixture()
        scene_three = LayoutScene(
            positions=[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]],
            radii=[1.0, 1.0, 1.0],
            edges=np.empty((0, 2), dtype=np.int64),
            edge_widths=[],
            frame=Rect(0, 0, 10, 10),
            item_labels=("a", "b", "c"),
            item_groups=[0, 1, 2],
            group_sizes=[1, 1, 1],
        )
        with pytest.raises(ValueError, match="match"):
            export_dot(sg, scene_three)

    def test_type_check(self):
        with pytest.raises(TypeError, match="expected"):
            export_dot([1, 2, 3])

    def test_deterministic(self):
        sg = self.summary_fixture()
        assert export_dot(sg) == export_dot(sg)
