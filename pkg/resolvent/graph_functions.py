#!/usr/bin/env python3
"""
Graph Functions
Functions on a metric graph given edge by edge, plus the built-in families selectable by name
"""

import math
from typing import Callable, Dict, List, Optional

import numpy as np

from graph_core.metric_graph import GraphPoint, MetricGraph


class ConstantPiece:
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), self.value)


class BumpPiece:
    """height * exp(1 - 1/(1 - s^2)) for |s| < 1, s = (x - center)/width; zero outside"""

    def __init__(self, center: float, width: float, height: float = 1.0):
        self.center = float(center)
        self.width = float(width)
        self.height = float(height)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        inside = np.abs(s) < 1.0
        values = np.zeros(s.shape)
        values[inside] = self.height * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return values

    def breakpoints(self) -> List[float]:
        return [self.center - self.width, self.center, self.center + self.width]


def smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


class RampPiece:
    """1 on the edge except smoothstep ramps of width `width` down to 0 at each finite end"""

    def __init__(self, length: float, width: float):
        self.length = float(length)
        self.width = float(width)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        values = smoothstep(x / self.width)
        if math.isfinite(self.length):
            values = values * smoothstep((self.length - x) / self.width)
        return values

    def breakpoints(self) -> List[float]:
        points = [self.width]
        if math.isfinite(self.length):
            points.append(self.length - self.width)
        return points


class ShiftedPiece:
    """Values of `source` on `edge_id` read at x + shift"""

    def __init__(self, source: "GraphFunction", edge_id: str, shift: float):
        self.source = source
        self.edge_id = edge_id
        self.shift = float(shift)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.source.edge_values(self.edge_id, np.asarray(x, dtype=float) + self.shift)

    def breakpoints(self) -> List[float]:
        return [p - self.shift for p in self.source.breakpoints(self.edge_id)]


class GraphFunction:
    """
    A function on the graph: a callable per edge (vectorized over local coordinates) and a value
    per vertex. Edges and vertices without an entry take `default`.
    """

    def __init__(self, pieces: Dict[str, Callable] = None, vertex_values: Dict[str, float] = None,
                 default: float = 0.0, name: str = "f"):
        self.pieces = dict(pieces or {})
        self.vertex_values = dict(vertex_values or {})
        self.default = float(default)
        self.name = name

    def edge_values(self, edge_id: str, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        piece = self.pieces.get(edge_id)
        if piece is None:
            return np.full(x.shape, self.default)
        return np.asarray(piece(x), dtype=float)

    def vertex_value(self, vertex: str) -> float:
        return self.vertex_values.get(vertex, self.default)

    def at(self, point: GraphPoint) -> float:
        if point.is_vertex:
            return self.vertex_value(point.vertex)
        return float(self.edge_values(point.edge, [point.x])[0])

    def breakpoints(self, edge_id: str) -> List[float]:
        """Points where the edge piece is not smooth, as quadrature hints"""
        piece = self.pieces.get(edge_id)
        hints = getattr(piece, "breakpoints", None)
        return list(hints()) if hints else []

    def __repr__(self) -> str:
        return f"GraphFunction({self.name})"


def constant(value: float = 1.0) -> GraphFunction:
    return GraphFunction(default=value, name=f"const:{value:g}")


def bump(g: MetricGraph, edge_id: str, center: float, width: float, height: float = 1.0) -> GraphFunction:
    length = g.edge_length(edge_id)
    if not (width > 0 and center - width > 0 and center + width < length):
        raise ValueError(f"bump support [{center - width}, {center + width}] must lie inside edge {edge_id}")
    return GraphFunction({edge_id: BumpPiece(center, width, height)}, {v: 0.0 for v in g.vertices},
                         default=0.0, name=f"bump:{edge_id}:{center:g}:{width:g}:{height:g}")


def indicator(g: MetricGraph, edge_id: str, width: float) -> GraphFunction:
    length = g.edge_length(edge_id)
    if not (width > 0 and (math.isinf(length) or 2 * width <= length)):
        raise ValueError(f"ramp width {width} does not fit edge {edge_id}")
    return GraphFunction({edge_id: RampPiece(length, width)}, {v: 0.0 for v in g.vertices},
                         default=0.0, name=f"indicator:{edge_id}:{width:g}")


def parse_function(text: str, g: MetricGraph) -> GraphFunction:
    """
    Built-in families:
        const[:value]
        bump:<edge>:<center>:<width>[:height]
        indicator:<edge>:<width>
    """
    parts = text.strip().split(":")
    family = parts[0]
    try:
        if family == "const" and len(parts) <= 2:
            return constant(float(parts[1]) if len(parts) == 2 else 1.0)
        if family == "bump" and len(parts) in (4, 5):
            height = float(parts[4]) if len(parts) == 5 else 1.0
            return bump(g, parts[1], float(parts[2]), float(parts[3]), height)
        if family == "indicator" and len(parts) == 3:
            return indicator(g, parts[1], float(parts[2]))
    except ValueError as e:
        raise ValueError(f"bad function {text!r}: {e}")
    raise ValueError(f"unknown function {text!r} (use const[:v], bump:<edge>:<c>:<w>[:h] or indicator:<edge>:<w>)")


def default_probe_points(g: MetricGraph, count: int, external_extent: float = 2.0) -> List[GraphPoint]:
    """`count` interior probe points spread over the edges in declaration order"""
    edges = [(e.id, e.length) for e in g.internal_edges] + [(e.id, external_extent) for e in g.external_edges]
    points: List[GraphPoint] = []
    n = 0
    while len(points) < count and edges:
        edge_id, length = edges[n % len(edges)]
        rank = n // len(edges) + 1
        fraction = rank / (rank + 1.0) if rank % 2 else 1.0 / (rank + 1.0)
        points.append(g.point(edge_id, fraction * length))
        n += 1
    return points


def optional_function(text: Optional[str], g: MetricGraph) -> GraphFunction:
    return parse_function(text, g) if text else constant(1.0)
