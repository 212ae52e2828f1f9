#!/usr/bin/env python3
"""
Wentzell Boundary Data
Per-vertex weights (a_v, b_{v_l}, c_v) with a_v + sum(b) + c_v = 1 and a_v < 1
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from graph_core.metric_graph import MetricGraph, Port


# Allowed deviation of a_v + B_v + c_v from 1 before renormalizing
SUM_TOLERANCE = 1e-9


class WentzellViolationError(ValueError):
    """Raised when boundary data does not satisfy the vertex constraints"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class VertexData:
    """Boundary weights at a single vertex"""
    a: float
    b: Mapping[Port, float]
    c: float

    @property
    def total_b(self) -> float:
        return float(sum(self.b.values()))

    @property
    def total(self) -> float:
        return self.a + self.total_b + self.c


@dataclass(frozen=True)
class WentzellData:
    """Boundary data for every vertex of a graph, indexed by vertex id and incidence port"""
    vertices: Dict[str, VertexData] = field(default_factory=dict)

    def __getitem__(self, vertex: str) -> VertexData:
        return self.vertices[vertex]

    def __contains__(self, vertex: str) -> bool:
        return vertex in self.vertices

    def b(self, vertex: str, port: Port) -> float:
        return self.vertices[vertex].b.get(port, 0.0)

    @classmethod
    def from_raw(cls, g: MetricGraph,
                 a: Mapping[str, float],
                 b: Mapping[str, Mapping[Port, float]],
                 c: Mapping[str, float],
                 normalize: bool = True) -> "WentzellData":
        """
        Build validated data from raw weights. Missing entries default to 0. With
        `normalize`, weights summing to 1 within SUM_TOLERANCE are rescaled to sum exactly 1.
        Raises WentzellViolationError listing every violation.
        """
        raw = {}
        for v in g.vertices:
            raw[v] = VertexData(
                a=float(a.get(v, 0.0)),
                b={port: float(value) for port, value in b.get(v, {}).items()},
                c=float(c.get(v, 0.0)),
            )
        data = cls(raw)

        violations = validate(data, g)
        if violations:
            raise WentzellViolationError(violations)
        return data.normalized() if normalize else data

    def normalized(self) -> "WentzellData":
        """Rescale each vertex so that a + B + c = 1 exactly"""
        result = {}
        for v, d in self.vertices.items():
            total = d.total
            result[v] = VertexData(
                a=d.a / total,
                b={port: value / total for port, value in d.b.items()},
                c=d.c / total,
            )
        return WentzellData(result)

    def scaled(self, factor: float, vertex: Optional[str] = None) -> "WentzellData":
        """Multiply the weights of one (or every) vertex by a common positive factor"""
        result = {}
        for v, d in self.vertices.items():
            if vertex is None or v == vertex:
                d = VertexData(a=d.a * factor, b={p: x * factor for p, x in d.b.items()}, c=d.c * factor)
            result[v] = d
        return WentzellData(result)

    def with_vertex(self, vertex: str, data: VertexData) -> "WentzellData":
        result = dict(self.vertices)
        result[vertex] = data
        return WentzellData(result)

    def restricted(self, vertices) -> "WentzellData":
        return WentzellData({v: self.vertices[v] for v in vertices if v in self.vertices})

    def killing_free(self) -> bool:
        """True when no vertex carries a killing weight"""
        return all(d.a == 0.0 for d in self.vertices.values())


def validate(data: WentzellData, g: MetricGraph) -> List[str]:
    """Return the list of violations (empty when the data is valid for g)"""
    violations = []
    for v in g.vertices:
        if v not in data.vertices:
            violations.append(f"vertex {v}: no Wentzell data")
            continue
        d = data.vertices[v]
        incident = set(g.ports(v))

        for port, value in d.b.items():
            if port not in incident:
                violations.append(f"vertex {v}: b entry for non-incident edge {port.edge_id}")
            elif not (0.0 <= value <= 1.0 + SUM_TOLERANCE):
                violations.append(f"vertex {v}: b[{port}] = {value} outside [0, 1]")

        if not (0.0 <= d.a):
            violations.append(f"vertex {v}: a_v = {d.a} is negative")
        if d.a >= 1.0:
            violations.append(f"vertex {v}: a_v must be < 1 (got {d.a})")
        if not (0.0 <= d.c <= 1.0 + SUM_TOLERANCE):
            violations.append(f"vertex {v}: c_v = {d.c} outside [0, 1]")

        total = d.total
        if not math.isfinite(total) or abs(total - 1.0) > SUM_TOLERANCE:
            violations.append(f"vertex {v}: a + sum(b) + c = {total:.12g} (must be 1)")

    extra = set(data.vertices) - set(g.vertices)
    for v in sorted(extra):
        violations.append(f"vertex {v}: data for undeclared vertex")
    return violations
