#!/usr/bin/env python3
"""
Graph Joiner
Connects external edges of two metric graphs by new internal edges and derives the
connected vertices V_c, the shadow vertices V_s and the map kappa: V_s -> V_c
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from graph_core.metric_graph import GraphPoint, InternalEdge, MetricGraph, Port
from wentzell.wentzell_data import VertexData, WentzellData


class JoinError(ValueError):
    """Raised for an invalid join plan"""


@dataclass(frozen=True)
class JoinPair:
    """Connect external edge `e` of G1 with external edge `l` of G2 by an edge of length `length`"""
    e: str
    l: str
    length: float
    orientation: int = 1
    new_edge_id: Optional[str] = None

    @property
    def edge_id(self) -> str:
        return self.new_edge_id or f"{self.e}~{self.l}"


@dataclass(frozen=True)
class JoinPlan:
    pairs: Tuple[JoinPair, ...] = ()

    @property
    def size(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class ShadowVertex:
    """Point at distance b_k on a joined external edge of G1 (side 1) or G2 (side 2)"""
    point: GraphPoint
    side: int
    target: str


@dataclass
class JoinResult:
    graph: MetricGraph
    new_edges: List[str] = field(default_factory=list)
    connected_vertices: List[str] = field(default_factory=list)
    shadow_vertices: List[ShadowVertex] = field(default_factory=list)
    data: Optional[WentzellData] = None

    def kappa(self, shadow: ShadowVertex) -> str:
        return shadow.target

    def shadows_of(self, vertex: str) -> List[ShadowVertex]:
        """shad(v): every shadow vertex mapped to `vertex`"""
        return [s for s in self.shadow_vertices if s.target == vertex]


def _check_plan(g1: MetricGraph, g2: MetricGraph, plan: JoinPlan):
    ids1 = set(g1.vertices) | set(g1.edge_ids)
    ids2 = set(g2.vertices) | set(g2.edge_ids)
    clash = ids1 & ids2
    if clash:
        raise JoinError(f"graphs share ids: {', '.join(sorted(clash))}")

    used = set()
    new_ids = set()
    for pair in plan.pairs:
        if pair.e not in g1.external_by_id:
            raise JoinError(f"{pair.e} is not an external edge of {g1.name}")
        if pair.l not in g2.external_by_id:
            raise JoinError(f"{pair.l} is not an external edge of {g2.name}")
        for edge_id in (pair.e, pair.l):
            if edge_id in used:
                raise JoinError(f"edge {edge_id} used in two pairs")
            used.add(edge_id)
        if not (pair.length > 0 and math.isfinite(pair.length)):
            raise JoinError(f"non-positive length {pair.length} for pair ({pair.e}, {pair.l})")
        if pair.orientation not in (-1, 1):
            raise JoinError(f"orientation must be +1 or -1, got {pair.orientation}")
        if pair.edge_id in ids1 | ids2 | new_ids:
            raise JoinError(f"new edge id {pair.edge_id} already in use")
        new_ids.add(pair.edge_id)


def join_graphs(g1: MetricGraph, g2: MetricGraph, plan: JoinPlan,
                data1: WentzellData = None, data2: WentzellData = None,
                name: str = None) -> JoinResult:
    """Join g1 and g2 along the plan's pairs of external edges"""
    _check_plan(g1, g2, plan)

    joined = {p.e for p in plan.pairs} | {p.l for p in plan.pairs}
    new_internal = []
    shadows = []
    port_moves: Dict[Tuple[str, Port], Port] = {}

    for pair in plan.pairs:
        v = g1.external_by_id[pair.e].vertex
        w = g2.external_by_id[pair.l].vertex
        tail, head = (v, w) if pair.orientation == 1 else (w, v)
        new_internal.append(InternalEdge(pair.edge_id, tail, head, float(pair.length)))

        # the shadow of v lives on l_k in G2, the shadow of w on e_k in G1
        shadows.append(ShadowVertex(g1.point(pair.e, pair.length), side=1, target=w))
        shadows.append(ShadowVertex(g2.point(pair.l, pair.length), side=2, target=v))

        port_moves[(v, Port(pair.e, "-"))] = Port(pair.edge_id, "-" if pair.orientation == 1 else "+")
        port_moves[(w, Port(pair.l, "-"))] = Port(pair.edge_id, "+" if pair.orientation == 1 else "-")

    graph = MetricGraph(
        name=name or f"{g1.name}+{g2.name}",
        vertices=g1.vertices + g2.vertices,
        internal_edges=g1.internal_edges + g2.internal_edges + tuple(new_internal),
        external_edges=tuple(e for e in g1.external_edges + g2.external_edges if e.id not in joined),
        allow_tadpoles=g1.allow_tadpoles or g2.allow_tadpoles,
    )

    connected = []
    for edge in new_internal:
        for vertex in (edge.tail, edge.head):
            if vertex not in connected:
                connected.append(vertex)

    data = None
    if data1 is not None and data2 is not None:
        data = _merge_data(data1, data2, port_moves)

    return JoinResult(graph=graph, new_edges=[e.id for e in new_internal],
                      connected_vertices=connected, shadow_vertices=shadows, data=data)


def _merge_data(data1: WentzellData, data2: WentzellData,
                port_moves: Dict[Tuple[str, Port], Port]) -> WentzellData:
    """Carry the boundary weights over, re-keying joined external ports onto the new edges"""
    merged = {}
    for source in (data1, data2):
        for vertex, d in source.vertices.items():
            b = {port_moves.get((vertex, port), port): value for port, value in d.b.items()}
            merged[vertex] = VertexData(a=d.a, b=b, c=d.c)
    return WentzellData(merged)


def disjoint_union(g1: MetricGraph, g2: MetricGraph, name: str = None) -> MetricGraph:
    """The join with no pairs"""
    return join_graphs(g1, g2, JoinPlan(), name=name).graph
