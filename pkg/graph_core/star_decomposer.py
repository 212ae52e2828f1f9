#!/usr/bin/env python3
"""
Star Decomposer
Splits a metric graph into single-vertex star graphs G(v) with shadow stop points, and
joins the stars back together
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from graph_core.graph_joiner import JoinPair, JoinPlan, join_graphs
from graph_core.metric_graph import (
    ExternalEdge, GraphPoint, GraphValidationError, MetricGraph, Port
)
from wentzell.wentzell_data import VertexData, WentzellData


@dataclass(frozen=True)
class Ray:
    """
    One ray of a star. `port` is the incidence in the original graph; internal rays carry a
    shadow stop at distance `stop_distance` (the edge length) whose kappa-target is `target`.
    """
    index: int
    port: Port
    star_edge_id: str
    length: float
    target: Optional[str] = None

    @property
    def stop_distance(self) -> float:
        return self.length if self.target is not None else math.inf

    @property
    def is_internal(self) -> bool:
        return self.target is not None


@dataclass(frozen=True)
class Star:
    vertex: str
    rays: Tuple[Ray, ...]
    graph: MetricGraph
    data: Optional[WentzellData] = None

    @property
    def stop_distances(self) -> Tuple[float, ...]:
        return tuple(r.stop_distance for r in self.rays)

    @property
    def targets(self) -> Tuple[Optional[str], ...]:
        return tuple(r.target for r in self.rays)

    @property
    def shadow_points(self) -> List[Tuple[GraphPoint, str]]:
        """Stop set as (point on G(v), kappa-target)"""
        return [(self.graph.point(r.star_edge_id, r.length), r.target) for r in self.rays if r.is_internal]

    def ray_for_port(self, port: Port) -> Ray:
        for ray in self.rays:
            if ray.port == port:
                return ray
        raise KeyError(f"{port} is not a ray of the star at {self.vertex}")


@dataclass
class StarDecomposition:
    graph: MetricGraph
    stars: Dict[str, Star] = field(default_factory=dict)

    def __getitem__(self, vertex: str) -> Star:
        return self.stars[vertex]

    def to_global(self, vertex: str, ray_index: int, distance: float) -> GraphPoint:
        """Point at `distance` from `vertex` along one of its rays, in coordinates of the graph"""
        if distance == 0.0:
            return GraphPoint(vertex=vertex)
        ray = self.stars[vertex].rays[ray_index]
        if distance > ray.length:
            raise GraphValidationError(f"distance {distance} beyond ray {ray.port} of {vertex}")
        if ray.port.end == "-":
            return self.graph.point(ray.port.edge_id, distance)
        return self.graph.point(ray.port.edge_id, ray.length - distance)

    def to_star(self, point: GraphPoint, vertex: str) -> Tuple[Optional[int], float]:
        """(ray index, distance) of a global point on the star of `vertex`; (None, 0) at the vertex"""
        if point.is_vertex:
            if point.vertex == vertex:
                return None, 0.0
            for ray in self.stars[vertex].rays:
                if ray.target == point.vertex:
                    return ray.index, ray.length
            raise GraphValidationError(f"vertex {point.vertex} is not adjacent to {vertex}")
        for ray in self.stars[vertex].rays:
            if ray.port.edge_id == point.edge:
                distance = point.x if ray.port.end == "-" else ray.length - point.x
                return ray.index, distance
        raise GraphValidationError(f"point {point} does not lie on the star of {vertex}")


def _star_edge_id(vertex: str, port: Port) -> str:
    return f"{vertex}/{port.edge_id}"


def decompose_to_stars(g: MetricGraph, data: WentzellData = None) -> StarDecomposition:
    """One star per vertex; each internal edge puts a shadow point on both of its endpoint stars"""
    if g.has_tadpoles:
        raise GraphValidationError("graph contains tadpoles (expand them first)")

    decomposition = StarDecomposition(graph=g)
    for v in g.vertices:
        rays = []
        for index, port in enumerate(g.ports(v)):
            rays.append(Ray(index=index, port=port, star_edge_id=_star_edge_id(v, port),
                            length=g.edge_length(port.edge_id), target=g.opposite_vertex(port)))
        star_graph = MetricGraph(name=f"G({v})", vertices=(v,),
                                 external_edges=tuple(ExternalEdge(r.star_edge_id, v) for r in rays))
        star_data = None
        if data is not None:
            d = data[v]
            star_data = WentzellData({v: VertexData(
                a=d.a,
                b={Port(r.star_edge_id, "-"): d.b.get(r.port, 0.0) for r in rays},
                c=d.c,
            )})
        decomposition.stars[v] = Star(vertex=v, rays=tuple(rays), graph=star_graph, data=star_data)
    return decomposition


def reassemble_stars(decomposition: StarDecomposition, name: str = None) -> MetricGraph:
    """
    Join the stars one at a time in vertex order. Every internal edge is created when the star
    of its second endpoint joins; leftover star edges get their original external ids back.
    """
    order = list(decomposition.stars)
    if not order:
        raise GraphValidationError("empty decomposition")

    assembled = decomposition.stars[order[0]].graph
    placed = {order[0]}
    for v in order[1:]:
        star = decomposition.stars[v]
        pairs = []
        for ray in star.rays:
            if not ray.is_internal or ray.target not in placed:
                continue
            partner = decomposition.stars[ray.target].ray_for_port(
                Port(ray.port.edge_id, "+" if ray.port.end == "-" else "-"))
            # the assembled side holds the tail when this star holds the "+" end
            orientation = 1 if ray.port.end == "+" else -1
            pairs.append(JoinPair(e=partner.star_edge_id, l=ray.star_edge_id, length=ray.length,
                                  orientation=orientation, new_edge_id=ray.port.edge_id))
        assembled = join_graphs(assembled, star.graph, JoinPlan(tuple(pairs))).graph
        placed.add(v)

    original_ids = {r.star_edge_id: r.port.edge_id
                    for star in decomposition.stars.values() for r in star.rays}
    externals = tuple(ExternalEdge(original_ids[e.id], e.vertex) for e in assembled.external_edges)
    return MetricGraph(name=name or decomposition.graph.name, vertices=assembled.vertices,
                       internal_edges=assembled.internal_edges, external_edges=externals)
