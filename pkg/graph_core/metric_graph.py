#!/usr/bin/env python3
"""
Metric Graph Data Model
Vertices, internal/external edges, incidence ports and points on a finite metric graph
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


# Endpoint normalization tolerance is relative to the edge length
ENDPOINT_TOLERANCE = 1e-12


class GraphValidationError(ValueError):
    """Raised when a metric graph violates a structural invariant"""


@dataclass(frozen=True)
class InternalEdge:
    """Compact edge [0, length] running from `tail` (coordinate 0) to `head` (coordinate length)"""
    id: str
    tail: str
    head: str
    length: float

    @property
    def is_tadpole(self) -> bool:
        return self.tail == self.head


@dataclass(frozen=True)
class ExternalEdge:
    """Half line [0, inf) attached to `vertex` at coordinate 0"""
    id: str
    vertex: str


@dataclass(frozen=True, order=True)
class Port:
    """One incidence of an edge with a vertex: end "-" is coordinate 0, end "+" is the far end"""
    edge_id: str
    end: str = "-"

    def __str__(self) -> str:
        return f"{self.edge_id}{self.end}"


@dataclass(frozen=True)
class GraphPoint:
    """
    A point of the graph. Vertex points carry `vertex`; interior points carry `edge` and
    the local coordinate `x`. Use MetricGraph.point() to build normalized points.
    """
    edge: Optional[str] = None
    x: float = 0.0
    vertex: Optional[str] = None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def __str__(self) -> str:
        if self.is_vertex:
            return self.vertex
        return f"{self.edge}:{self.x:g}"


@dataclass(frozen=True)
class MetricGraph:
    """Finite metric graph G = (V, I, E, ∂) with edge lengths"""
    name: str
    vertices: Tuple[str, ...]
    internal_edges: Tuple[InternalEdge, ...] = ()
    external_edges: Tuple[ExternalEdge, ...] = ()
    allow_tadpoles: bool = False
    _ports: Dict[str, Tuple[Port, ...]] = field(default=None, init=False, repr=False, compare=False)
    _internal: Dict[str, InternalEdge] = field(default=None, init=False, repr=False, compare=False)
    _external: Dict[str, ExternalEdge] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "_internal", {e.id: e for e in self.internal_edges})
        object.__setattr__(self, "_external", {e.id: e for e in self.external_edges})
        ports: Dict[str, List[Port]] = {v: [] for v in self.vertices}
        for edge in self.internal_edges:
            ports[edge.tail].append(Port(edge.id, "-"))
            ports[edge.head].append(Port(edge.id, "+"))
        for edge in self.external_edges:
            ports[edge.vertex].append(Port(edge.id, "-"))
        object.__setattr__(self, "_ports", {v: tuple(p) for v, p in ports.items()})

        isolated = [v for v, p in self._ports.items() if not p]
        if isolated:
            raise GraphValidationError(f"isolated vertices (no incident edges): {', '.join(isolated)}")

    def _validate(self):
        """Check ids, endpoints and lengths"""
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphValidationError("duplicate vertex id")
        vertex_set = set(self.vertices)

        edge_ids = [e.id for e in self.internal_edges] + [e.id for e in self.external_edges]
        seen = set()
        for edge_id in edge_ids:
            if edge_id in seen:
                raise GraphValidationError(f"duplicate edge id {edge_id}")
            seen.add(edge_id)
        overlap = seen & vertex_set
        if overlap:
            raise GraphValidationError(f"ids used for both a vertex and an edge: {', '.join(sorted(overlap))}")

        for edge in self.internal_edges:
            for endpoint in (edge.tail, edge.head):
                if endpoint not in vertex_set:
                    raise GraphValidationError(f"undeclared vertex {endpoint}")
            if not (edge.length > 0 and math.isfinite(edge.length)):
                raise GraphValidationError(f"edge {edge.id} has invalid length {edge.length}")
            if edge.is_tadpole and not self.allow_tadpoles:
                raise GraphValidationError(f"tadpole {edge.id} at {edge.tail} (expand tadpoles first)")
        for edge in self.external_edges:
            if edge.vertex not in vertex_set:
                raise GraphValidationError(f"undeclared vertex {edge.vertex}")

    # ---- lookups ---------------------------------------------------------

    @property
    def internal_by_id(self) -> Dict[str, InternalEdge]:
        return self._internal

    @property
    def external_by_id(self) -> Dict[str, ExternalEdge]:
        return self._external

    @property
    def edge_ids(self) -> List[str]:
        return [e.id for e in self.internal_edges] + [e.id for e in self.external_edges]

    @property
    def has_tadpoles(self) -> bool:
        return any(e.is_tadpole for e in self.internal_edges)

    def ports(self, vertex: str) -> Tuple[Port, ...]:
        """L(v) as ports, in declaration order"""
        return self._ports[vertex]

    def degree(self, vertex: str) -> int:
        return len(self._ports[vertex])

    def edge_length(self, edge_id: str) -> float:
        internal = self.internal_by_id.get(edge_id)
        if internal is not None:
            return internal.length
        if edge_id in self.external_by_id:
            return math.inf
        raise GraphValidationError(f"unknown edge {edge_id}")

    def port_vertex(self, port: Port) -> str:
        """Vertex at which a port sits"""
        internal = self.internal_by_id.get(port.edge_id)
        if internal is not None:
            return internal.tail if port.end == "-" else internal.head
        return self.external_by_id[port.edge_id].vertex

    def opposite_vertex(self, port: Port) -> Optional[str]:
        """Far endpoint of an internal edge seen from a port (None for external edges)"""
        internal = self.internal_by_id.get(port.edge_id)
        if internal is None:
            return None
        return internal.head if port.end == "-" else internal.tail

    def is_connected_vertex(self, vertex: str) -> bool:
        """True when the vertex is incident with at least one internal edge"""
        return any(p.edge_id in self.internal_by_id for p in self._ports[vertex])

    # ---- points ----------------------------------------------------------

    def vertex_point(self, vertex: str) -> GraphPoint:
        if vertex not in self._ports:
            raise GraphValidationError(f"undeclared vertex {vertex}")
        return GraphPoint(vertex=vertex)

    def point(self, edge_id: str, x: float) -> GraphPoint:
        """Normalized point at coordinate x on an edge (endpoints collapse to vertices)"""
        internal = self.internal_by_id.get(edge_id)
        if internal is not None:
            tolerance = ENDPOINT_TOLERANCE * max(1.0, internal.length)
            if x < -tolerance or x > internal.length + tolerance:
                raise GraphValidationError(f"coordinate {x} outside edge {edge_id} [0, {internal.length}]")
            if abs(x) <= tolerance:
                return GraphPoint(vertex=internal.tail)
            if abs(x - internal.length) <= tolerance:
                return GraphPoint(vertex=internal.head)
            return GraphPoint(edge=edge_id, x=float(x))

        external = self.external_by_id.get(edge_id)
        if external is None:
            raise GraphValidationError(f"unknown edge {edge_id}")
        if x < -ENDPOINT_TOLERANCE or not math.isfinite(x):
            raise GraphValidationError(f"coordinate {x} outside edge {edge_id} [0, inf)")
        if abs(x) <= ENDPOINT_TOLERANCE:
            return GraphPoint(vertex=external.vertex)
        return GraphPoint(edge=edge_id, x=float(x))

    def parse_point(self, text: str) -> GraphPoint:
        """Parse `vertex` or `edge:x` notation"""
        if ":" in text:
            edge_id, coordinate = text.rsplit(":", 1)
            return self.point(edge_id, float(coordinate))
        return self.vertex_point(text)

    def distance_from_port(self, point: GraphPoint, port: Port) -> float:
        """Distance from the port's vertex to a point lying on the port's edge"""
        if point.is_vertex:
            if point.vertex == self.port_vertex(port):
                return 0.0
            if self.opposite_vertex(port) == point.vertex:
                return self.edge_length(port.edge_id)
            return math.inf
        if point.edge != port.edge_id:
            return math.inf
        if port.end == "-":
            return point.x
        return self.edge_length(port.edge_id) - point.x

    def distance_to_vertex(self, point: GraphPoint, vertex: str) -> float:
        """Distance along the point's own edge to a vertex (inf if the edge is not incident)"""
        if point.is_vertex:
            return 0.0 if point.vertex == vertex else math.inf
        internal = self.internal_by_id.get(point.edge)
        if internal is not None:
            candidates = []
            if internal.tail == vertex:
                candidates.append(point.x)
            if internal.head == vertex:
                candidates.append(internal.length - point.x)
            return min(candidates) if candidates else math.inf
        if self.external_by_id[point.edge].vertex == vertex:
            return point.x
        return math.inf

    # ---- canonical form --------------------------------------------------

    def canonical_form(self) -> Tuple:
        """Sorted description making graph equality decidable"""
        return (
            tuple(sorted(self.vertices)),
            tuple(sorted((e.id, e.tail, e.head, e.length) for e in self.internal_edges)),
            tuple(sorted((e.id, e.vertex) for e in self.external_edges)),
        )

    def same_as(self, other: "MetricGraph") -> bool:
        return self.canonical_form() == other.canonical_form()

    def summary(self) -> str:
        return (f"{self.name}: |V|={len(self.vertices)}, |I|={len(self.internal_edges)}, "
                f"|E|={len(self.external_edges)}")
