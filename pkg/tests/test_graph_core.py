#!/usr/bin/env python3
"""
Tests for graph parsing, joining, star decomposition and tadpole expansion
"""

import math
import os
import sys

import pytest
from hypothesis import given, settings, strategies as st

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from graph_core.graph_joiner import JoinError, JoinPair, JoinPlan, disjoint_union, join_graphs
from graph_core.graph_parser import GraphFormatError, format_graph, load_graph, parse_graph
from graph_core.metric_graph import (
    ExternalEdge, GraphPoint, GraphValidationError, InternalEdge, MetricGraph, Port
)
from graph_core.star_decomposer import decompose_to_stars, reassemble_stars
from graph_core.tadpole_expander import expand_tadpoles
from resolvent.graph_functions import bump
from simulation.paste_engine import build_process
from wentzell.wentzell_data import WentzellViolationError, validate
from tests.test_data import (
    BAD_DOCS, BAD_SUM_DOC, G1_DOC, G2_DOC, INTERVAL_DOC, TADPOLE_DOC, TADPOLE_ENDS_DOC, TWO_VERTEX_DOC
)


@pytest.mark.unit
class TestGraphParser:
    """Test the graph file format"""

    def test_parse_interval(self, interval):
        g, data = interval
        assert g.name == "interval"
        assert g.vertices == ("v1", "v2")
        assert g.edge_length("i1") == 1.0
        assert data["v1"].b == {Port("i1", "-"): 1.0}
        assert data["v2"].b == {Port("i1", "+"): 1.0}
        assert validate(data, g) == []

    def test_comments_and_blank_lines(self, two_vertex):
        g, data = two_vertex
        assert g.summary() == "two_vertex: |V|=2, |I|=1, |E|=2"
        assert data["v1"].a == pytest.approx(0.1)

    @pytest.mark.parametrize("document,fragment", BAD_DOCS)
    def test_bad_documents(self, document, fragment):
        with pytest.raises(ValueError) as excinfo:
            parse_graph(document)
        assert fragment in str(excinfo.value)

    def test_format_error_carries_line_number(self):
        with pytest.raises(GraphFormatError) as excinfo:
            parse_graph("vertex v\n\n# comment\nvertex v\n")
        assert excinfo.value.line_no == 4

    def test_wentzell_sum_violation(self):
        with pytest.raises(WentzellViolationError) as excinfo:
            parse_graph(BAD_SUM_DOC)
        assert any("must be 1" in v for v in excinfo.value.violations)

    def test_tadpole_weight_split_evenly(self, tadpole):
        g, data = tadpole
        assert g.has_tadpoles
        assert data.b("v", Port("t", "-")) == pytest.approx(0.2)
        assert data.b("v", Port("t", "+")) == pytest.approx(0.2)

    def test_tadpole_ends_addressed_explicitly(self):
        g, data = parse_graph(TADPOLE_ENDS_DOC)
        assert data.b("v", Port("t", "-")) == pytest.approx(0.5)
        assert data.b("v", Port("t", "+")) == pytest.approx(0.2)

    def test_tadpoles_rejected_when_not_allowed(self):
        with pytest.raises(GraphValidationError):
            parse_graph(TADPOLE_DOC, allow_tadpoles=False)

    def test_graph_without_data(self):
        g, data = parse_graph("vertex v\needge e v\n", require_data=False)
        assert data is None
        assert g.degree("v") == 1

    def test_format_then_parse_gives_same_graph(self, two_vertex):
        g, data = two_vertex
        g2, data2 = parse_graph(format_graph(g, data))
        assert g2.same_as(g)
        assert data2["v2"].b == data["v2"].b

    def test_load_graph_uses_file_stem(self, graph_file):
        path = graph_file("vertex v\needge e v\nwentzell v a=0 c=0\nwb v e 1\n", name="lonely.g")
        g, _ = load_graph(path)
        assert g.name == "lonely"

    def test_bundled_graphs_are_valid(self):
        graphs_dir = os.path.join(os.path.dirname(__file__), '..', 'graphs')
        names = [n for n in os.listdir(graphs_dir) if n.endswith(".g")]
        assert "figure_two.g" in names
        for name in names:
            g, data = load_graph(os.path.join(graphs_dir, name))
            assert validate(data, g) == [], name


@pytest.mark.unit
class TestMetricGraph:
    """Test points, distances and validation"""

    def test_endpoints_collapse_to_vertices(self, interval):
        g, _ = interval
        assert g.point("i1", 0.0) == GraphPoint(vertex="v1")
        assert g.point("i1", 1.0) == GraphPoint(vertex="v2")
        assert g.point("i1", 0.25) == GraphPoint(edge="i1", x=0.25)

    def test_point_outside_edge(self, interval):
        g, _ = interval
        with pytest.raises(GraphValidationError):
            g.point("i1", 1.5)
        with pytest.raises(GraphValidationError):
            g.point("nope", 0.5)

    def test_parse_point(self, two_vertex):
        g, _ = two_vertex
        assert g.parse_point("v2").vertex == "v2"
        point = g.parse_point("e1:2.5")
        assert (point.edge, point.x) == ("e1", 2.5)

    def test_distances(self, two_vertex):
        g, _ = two_vertex
        point = g.point("i1", 0.3)
        assert g.distance_to_vertex(point, "v1") == pytest.approx(0.3)
        assert g.distance_to_vertex(point, "v2") == pytest.approx(0.7)
        assert g.distance_from_port(point, Port("i1", "+")) == pytest.approx(0.7)
        assert math.isinf(g.distance_to_vertex(g.point("e1", 1.0), "v2"))

    def test_external_edges_are_infinite(self, half_line):
        g, _ = half_line
        assert math.isinf(g.edge_length("e"))
        assert g.opposite_vertex(Port("e", "-")) is None
        assert not g.is_connected_vertex("v")

    def test_isolated_vertex_rejected(self):
        with pytest.raises(GraphValidationError):
            MetricGraph(name="x", vertices=("v", "w"), external_edges=(ExternalEdge("e", "v"),))

    def test_invalid_length_rejected(self):
        with pytest.raises(GraphValidationError):
            MetricGraph(name="x", vertices=("v", "w"), internal_edges=(InternalEdge("i", "v", "w", 0.0),))

    def test_canonical_form_ignores_declaration_order(self):
        a = MetricGraph(name="a", vertices=("v", "w"), internal_edges=(InternalEdge("i", "v", "w", 1.0),),
                        external_edges=(ExternalEdge("e", "v"), ExternalEdge("f", "w")))
        b = MetricGraph(name="b", vertices=("w", "v"), internal_edges=(InternalEdge("i", "v", "w", 1.0),),
                        external_edges=(ExternalEdge("f", "w"), ExternalEdge("e", "v")))
        assert a.same_as(b)


@pytest.mark.unit
class TestGraphJoiner:
    """Test joining two graphs along external edges"""

    @pytest.fixture
    def figure_two(self):
        g1, data1 = parse_graph(G1_DOC)
        g2, data2 = parse_graph(G2_DOC)
        plan = JoinPlan((JoinPair("e1", "l1", 1.0), JoinPair("e2", "l2", math.sqrt(2.0)), JoinPair("e3", "l3", 1.0)))
        return g1, g2, join_graphs(g1, g2, plan, data1, data2, name="figure_two")

    def test_joined_graph_shape(self, figure_two):
        _, _, result = figure_two
        g = result.graph
        assert len(g.vertices) == 7
        assert sorted(result.new_edges) == ["e1~l1", "e2~l2", "e3~l3"]
        assert {e.id for e in g.external_edges} == {"x1", "x2", "y1"}
        assert [g.edge_length(e) for e in result.new_edges] == [1.0, math.sqrt(2.0), 1.0]

    def test_edge_counts(self, figure_two):
        g1, g2, result = figure_two
        g = result.graph
        assert len(g.internal_edges) == len(g1.internal_edges) + len(g2.internal_edges) + 3
        assert len(g.external_edges) == len(g1.external_edges) + len(g2.external_edges) - 6

    def test_lengths_survive_format_round_trip(self, figure_two):
        _, _, result = figure_two
        g, data = parse_graph(format_graph(result.graph, result.data))
        assert g.edge_length("e1~l1") == 1.0
        assert g.edge_length("e2~l2") == math.sqrt(2.0)
        assert g.edge_length("e3~l3") == 1.0
        assert validate(data, g) == []

    def test_matches_bundled_file(self, figure_two):
        _, _, result = figure_two
        g, _ = load_graph(os.path.join(os.path.dirname(__file__), '..', 'graphs', 'figure_two.g'))
        assert g.same_as(result.graph)

    def test_connected_and_shadow_vertices(self, figure_two):
        _, _, result = figure_two
        assert set(result.connected_vertices) == {"v2", "v3", "w1", "w2"}
        assert len(result.shadow_vertices) == 6
        assert sorted(s.target for s in result.shadows_of("w2")) == ["w2", "w2"]
        shadow = result.shadows_of("w1")[0]
        assert shadow.point == GraphPoint(edge="e1", x=1.0)
        assert result.kappa(shadow) == "w1"

    def test_data_rekeyed_onto_new_edges(self, figure_two):
        _, _, result = figure_two
        assert validate(result.data, result.graph) == []
        assert result.data.b("v2", Port("e1~l1", "-")) == pytest.approx(0.4)
        assert result.data.b("w2", Port("e2~l2", "+")) == pytest.approx(0.3)

    def test_reversed_orientation(self):
        g1, _ = parse_graph(G1_DOC)
        g2, _ = parse_graph(G2_DOC)
        result = join_graphs(g1, g2, JoinPlan((JoinPair("e1", "l1", 1.0, orientation=-1),)))
        edge = result.graph.internal_by_id["e1~l1"]
        assert (edge.tail, edge.head) == ("w1", "v2")

    def test_shared_ids_rejected(self, interval):
        g, _ = interval
        with pytest.raises(JoinError, match="share ids"):
            disjoint_union(g, g)

    @pytest.mark.parametrize("pair,message", [
        (JoinPair("p1", "l1", 1.0), "not an external edge"),
        (JoinPair("e1", "l1", -1.0), "non-positive length"),
        (JoinPair("e1", "l1", 1.0, orientation=0), "orientation"),
        (JoinPair("e1", "l1", 1.0, new_edge_id="q1"), "already in use"),
    ])
    def test_bad_pairs(self, pair, message):
        g1, _ = parse_graph(G1_DOC)
        g2, _ = parse_graph(G2_DOC)
        with pytest.raises(JoinError, match=message):
            join_graphs(g1, g2, JoinPlan((pair,)))

    def test_edge_used_twice(self):
        g1, _ = parse_graph(G1_DOC)
        g2, _ = parse_graph(G2_DOC)
        plan = JoinPlan((JoinPair("e1", "l1", 1.0), JoinPair("e1", "l2", 1.0)))
        with pytest.raises(JoinError, match="two pairs"):
            join_graphs(g1, g2, plan)


@st.composite
def random_graphs(draw, prefix=""):
    """Connected-ish random graphs with up to 8 vertices; every vertex gets at least one edge"""
    count = draw(st.integers(min_value=1, max_value=8))
    vertices = [f"{prefix}v{i}" for i in range(count)]
    internal = []
    for i in range(1, count):
        j = draw(st.integers(min_value=0, max_value=i - 1))
        length = draw(st.floats(min_value=0.1, max_value=5.0))
        internal.append(InternalEdge(f"{prefix}i{i}", vertices[j], vertices[i], length))
    extra = draw(st.integers(min_value=0, max_value=3))
    for n in range(extra):
        a = draw(st.sampled_from(vertices))
        b = draw(st.sampled_from(vertices))
        if a != b:
            internal.append(InternalEdge(f"{prefix}x{n}", a, b, draw(st.floats(min_value=0.1, max_value=5.0))))
    external = [ExternalEdge(f"{prefix}e{i}", v) for i, v in enumerate(vertices)
                if draw(st.booleans()) or count == 1]
    return MetricGraph(name=prefix or "random", vertices=tuple(vertices), internal_edges=tuple(internal),
                       external_edges=tuple(external))


@pytest.mark.unit
class TestRandomJoins:
    """Test join bookkeeping on random graph pairs and plans"""

    @given(st.data())
    @settings(max_examples=50, deadline=None)
    def test_edge_and_shadow_counts(self, data):
        g1 = data.draw(random_graphs("a"))
        g2 = data.draw(random_graphs("b"))
        most = min(len(g1.external_edges), len(g2.external_edges))
        n = data.draw(st.integers(min_value=0, max_value=most))
        left = data.draw(st.permutations([e.id for e in g1.external_edges]))[:n]
        right = data.draw(st.permutations([e.id for e in g2.external_edges]))[:n]
        pairs = tuple(
            JoinPair(e, l, data.draw(st.floats(min_value=0.1, max_value=5.0)),
                     orientation=data.draw(st.sampled_from([1, -1])))
            for e, l in zip(left, right)
        )
        result = join_graphs(g1, g2, JoinPlan(pairs))
        g = result.graph
        assert len(g.external_edges) == len(g1.external_edges) + len(g2.external_edges) - 2 * n
        assert len(g.internal_edges) == len(g1.internal_edges) + len(g2.internal_edges) + n
        assert len(result.shadow_vertices) == 2 * n
        assert len(g.vertices) == len(g1.vertices) + len(g2.vertices)


@pytest.mark.unit
class TestStarDecomposition:
    """Test splitting a graph into stars and putting it back together"""

    @pytest.fixture
    def figure_two(self):
        return load_graph(os.path.join(os.path.dirname(__file__), '..', 'graphs', 'figure_two.g'))

    def test_figure_two_has_a_star_per_vertex(self, figure_two):
        decomposition = decompose_to_stars(*figure_two)
        assert sorted(decomposition.stars) == ["v1", "v2", "v3", "w1", "w2", "w3", "w4"]

    def test_figure_two_stops_at_v2(self, figure_two):
        star = decompose_to_stars(*figure_two)["v2"]
        stops = {r.port.edge_id: (r.stop_distance, r.target) for r in star.rays if r.is_internal}
        assert stops == {"e1~l1": (1.0, "w1"), "e2~l2": (math.sqrt(2.0), "w2")}
        assert len(star.shadow_points) == 2
        assert sorted(target for _, target in star.shadow_points) == ["w1", "w2"]

    def test_figure_two_process(self, figure_two):
        spec = build_process(*figure_two)
        assert len(spec.decomposition.stars) == 7
        assert spec.stop_count("v2") == 2
        assert spec.stop_count("w2") == 3
        assert spec.stop_count("w3") == 1
        assert set(spec.connected_vertices) == set(figure_two[0].vertices)
        assert reassemble_stars(spec.decomposition).same_as(figure_two[0])

    def test_stars_of_two_vertex_graph(self, two_vertex):
        g, data = two_vertex
        decomposition = decompose_to_stars(g, data)
        star = decomposition["v1"]
        assert [r.star_edge_id for r in star.rays] == ["v1/i1", "v1/e1"]
        assert star.stop_distances == (1.0, math.inf)
        assert star.targets == ("v2", None)
        point, target = star.shadow_points[0]
        assert point == GraphPoint(edge="v1/i1", x=1.0)
        assert target == "v2"
        assert star.data["v1"].b[Port("v1/i1", "-")] == pytest.approx(0.4)

    def test_coordinates_round_trip(self, two_vertex):
        g, data = two_vertex
        decomposition = decompose_to_stars(g, data)
        point = decomposition.to_global("v2", 0, 0.25)
        assert point == GraphPoint(edge="i1", x=0.75)
        assert decomposition.to_star(point, "v2") == (0, pytest.approx(0.25))
        assert decomposition.to_star(GraphPoint(vertex="v1"), "v2") == (0, 1.0)
        assert decomposition.to_star(GraphPoint(vertex="v2"), "v2") == (None, 0.0)

    def test_tadpoles_must_be_expanded(self, tadpole):
        with pytest.raises(GraphValidationError):
            decompose_to_stars(*tadpole)

    def test_reassemble_two_vertex(self, two_vertex):
        g, data = two_vertex
        assert reassemble_stars(decompose_to_stars(g, data)).same_as(g)

    @given(random_graphs())
    @settings(max_examples=50, deadline=None)
    def test_reassemble_random_graphs(self, g):
        assert reassemble_stars(decompose_to_stars(g)).same_as(g)


@pytest.mark.unit
class TestTadpoleExpansion:
    """Test replacing loops by two half edges"""

    def test_expanded_graph(self, tadpole):
        expansion = expand_tadpoles(*tadpole)
        g = expansion.graph
        assert not g.has_tadpoles
        assert "t@0" in g.vertices
        assert g.edge_length("t.a") == pytest.approx(1.0)
        assert g.edge_length("t.b") == pytest.approx(1.0)
        assert validate(expansion.data, g) == []

    def test_expanded_data(self, tadpole):
        expansion = expand_tadpoles(*tadpole)
        data = expansion.data
        assert data.b("v", Port("t.a", "-")) == pytest.approx(0.2)
        assert data.b("v", Port("t.b", "+")) == pytest.approx(0.2)
        assert data["t@0"].a == 0.0 and data["t@0"].c == 0.0
        assert data.b("t@0", Port("t.a", "+")) == 0.5

    def test_map_point(self, tadpole):
        expansion = expand_tadpoles(*tadpole)
        g, _ = tadpole
        assert expansion.map_point(g.point("t", 0.5)) == GraphPoint(edge="t.a", x=0.5)
        assert expansion.map_point(g.point("t", 1.5)) == GraphPoint(edge="t.b", x=0.5)
        assert expansion.map_point(g.point("t", 1.0)) == GraphPoint(vertex="t@0")
        assert expansion.map_point(g.point("e", 2.0)) == GraphPoint(edge="e", x=2.0)

    def test_transport_function(self, tadpole):
        g, _ = tadpole
        expansion = expand_tadpoles(*tadpole)
        f = bump(g, "t", 1.2, 0.5)
        moved = expansion.transport_function(f)
        assert moved.edge_values("t.b", [0.2])[0] == pytest.approx(f.edge_values("t", [1.2])[0])
        assert moved.vertex_value("t@0") == pytest.approx(f.edge_values("t", [1.0])[0])

    def test_graph_without_tadpoles_is_untouched(self, interval):
        g, data = interval
        expansion = expand_tadpoles(g, data)
        assert expansion.graph is g
        assert expansion.halves == {}
