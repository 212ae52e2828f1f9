#!/usr/bin/env python3
"""
Tadpole Expander
Replaces every loop edge by two edges through an auxiliary vertex with unbiased Walsh data
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

from graph_core.metric_graph import GraphPoint, InternalEdge, MetricGraph, Port
from wentzell.wentzell_data import VertexData, WentzellData


@dataclass
class TadpoleExpansion:
    """Expanded graph and data, plus what is needed to move points and functions across"""
    graph: MetricGraph
    data: Optional[WentzellData]
    source: MetricGraph
    halves: Dict[str, float] = field(default_factory=dict)

    @staticmethod
    def aux_vertex(tadpole_id: str) -> str:
        return f"{tadpole_id}@0"

    def map_point(self, point: GraphPoint) -> GraphPoint:
        """Tadpole point (t, x) to the expanded graph; other points are unchanged"""
        if point.is_vertex or point.edge not in self.halves:
            return point
        half = self.halves[point.edge]
        if point.x < half:
            return self.graph.point(f"{point.edge}.a", point.x)
        return self.graph.point(f"{point.edge}.b", point.x - half)

    def transport_function(self, f):
        """Carry a GraphFunction from the tadpole graph onto the expanded graph"""
        from resolvent.graph_functions import GraphFunction, ShiftedPiece

        if not self.halves:
            return f
        pieces = dict(f.pieces)
        vertex_values = dict(f.vertex_values)
        for tadpole_id, half in self.halves.items():
            pieces[f"{tadpole_id}.a"] = ShiftedPiece(f, tadpole_id, 0.0)
            pieces[f"{tadpole_id}.b"] = ShiftedPiece(f, tadpole_id, half)
            pieces.pop(tadpole_id, None)
            vertex_values[self.aux_vertex(tadpole_id)] = float(f.edge_values(tadpole_id, [half])[0])
        return GraphFunction(pieces, vertex_values, default=f.default, name=f.name)


def expand_tadpoles(g: MetricGraph, data: WentzellData = None) -> TadpoleExpansion:
    """
    Each tadpole t of length b at v becomes vertex t@0 with edges t.a: v -> t@0 and
    t.b: t@0 -> v of length b/2. The data at v is unchanged apart from re-keying the two
    tadpole ports; t@0 gets a = c = 0 and b = 1/2 on each side.
    """
    if not g.has_tadpoles:
        return TadpoleExpansion(graph=g, data=data, source=g)

    vertices = list(g.vertices)
    internal = []
    halves = {}
    port_moves: Dict[Port, Port] = {}
    aux_data: Dict[str, VertexData] = {}

    for edge in g.internal_edges:
        if not edge.is_tadpole:
            internal.append(edge)
            continue
        half = edge.length / 2.0
        aux = TadpoleExpansion.aux_vertex(edge.id)
        vertices.append(aux)
        internal.append(InternalEdge(f"{edge.id}.a", edge.tail, aux, half))
        internal.append(InternalEdge(f"{edge.id}.b", aux, edge.tail, half))
        halves[edge.id] = half
        port_moves[Port(edge.id, "-")] = Port(f"{edge.id}.a", "-")
        port_moves[Port(edge.id, "+")] = Port(f"{edge.id}.b", "+")
        aux_data[aux] = VertexData(a=0.0, b={Port(f"{edge.id}.a", "+"): 0.5,
                                             Port(f"{edge.id}.b", "-"): 0.5}, c=0.0)

    expanded = MetricGraph(name=g.name, vertices=tuple(vertices), internal_edges=tuple(internal),
                           external_edges=g.external_edges, allow_tadpoles=False)

    expanded_data = None
    if data is not None:
        moved = {}
        for v, d in data.vertices.items():
            moved[v] = VertexData(a=d.a, b={port_moves.get(p, p): x for p, x in d.b.items()}, c=d.c)
        moved.update(aux_data)
        expanded_data = WentzellData(moved)

    return TadpoleExpansion(graph=expanded, data=expanded_data, source=g, halves=halves)
