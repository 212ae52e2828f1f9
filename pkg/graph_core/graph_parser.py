#!/usr/bin/env python3
"""
Graph Description Parser
Reads the line-oriented graph file format into a MetricGraph and its WentzellData
"""

import os
from typing import Dict, List, Optional, Tuple

from graph_core.metric_graph import (
    ExternalEdge, GraphValidationError, InternalEdge, MetricGraph, Port
)
from wentzell.wentzell_data import WentzellData


class GraphFormatError(ValueError):
    """Syntax or reference error in a graph description, with its line number"""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def _parse_float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise GraphFormatError(line_no, f"not a number: {token!r}")


def parse_graph(text: str, allow_tadpoles: bool = True,
                require_data: bool = True) -> Tuple[MetricGraph, Optional[WentzellData]]:
    """
    Parse a graph description document. With `require_data=False` a document without any
    wentzell/wb lines parses to (graph, None).

    Recognized lines (blank lines and '#' comments are ignored):
        graph <name>
        vertex <id>
        iedge <id> <v_from> <v_to> <length>
        eedge <id> <v>
        tadpole <id> <v> <length>
        wentzell <v> a=<float> c=<float>
        wb <v> <edge-id> <float>
    """
    name = "graph"
    vertices: List[str] = []
    internal: List[InternalEdge] = []
    external: List[ExternalEdge] = []
    a_weights: Dict[str, float] = {}
    c_weights: Dict[str, float] = {}
    b_lines: List[Tuple[int, str, str, float]] = []
    declared_ids = set()
    tadpole_ids = set()

    def declare(identifier: str, line_no: int):
        if identifier in declared_ids:
            raise GraphFormatError(line_no, f"duplicate id {identifier}")
        declared_ids.add(identifier)

    def require_vertex(vertex: str, line_no: int):
        if vertex not in vertices:
            raise GraphFormatError(line_no, f"undeclared vertex {vertex}")

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword, args = tokens[0], tokens[1:]

        if keyword == "graph":
            if len(args) != 1:
                raise GraphFormatError(line_no, "expected: graph <name>")
            name = args[0]
        elif keyword == "vertex":
            if len(args) != 1:
                raise GraphFormatError(line_no, "expected: vertex <id>")
            declare(args[0], line_no)
            vertices.append(args[0])
        elif keyword == "iedge":
            if len(args) != 4:
                raise GraphFormatError(line_no, "expected: iedge <id> <v_from> <v_to> <length>")
            edge_id, tail, head, length = args
            declare(edge_id, line_no)
            require_vertex(tail, line_no)
            require_vertex(head, line_no)
            internal.append(InternalEdge(edge_id, tail, head, _parse_float(length, line_no)))
        elif keyword == "eedge":
            if len(args) != 2:
                raise GraphFormatError(line_no, "expected: eedge <id> <v>")
            declare(args[0], line_no)
            require_vertex(args[1], line_no)
            external.append(ExternalEdge(args[0], args[1]))
        elif keyword == "tadpole":
            if len(args) != 3:
                raise GraphFormatError(line_no, "expected: tadpole <id> <v> <length>")
            edge_id, vertex, length = args
            declare(edge_id, line_no)
            require_vertex(vertex, line_no)
            internal.append(InternalEdge(edge_id, vertex, vertex, _parse_float(length, line_no)))
            tadpole_ids.add(edge_id)
        elif keyword == "wentzell":
            if not args:
                raise GraphFormatError(line_no, "expected: wentzell <v> a=<float> c=<float>")
            vertex = args[0]
            require_vertex(vertex, line_no)
            a_weights.setdefault(vertex, 0.0)
            c_weights.setdefault(vertex, 0.0)
            for assignment in args[1:]:
                key, sep, value = assignment.partition("=")
                if not sep or key not in ("a", "c"):
                    raise GraphFormatError(line_no, f"bad assignment {assignment!r} (use a=<float> or c=<float>)")
                target = a_weights if key == "a" else c_weights
                target[vertex] = _parse_float(value, line_no)
        elif keyword == "wb":
            if len(args) != 3:
                raise GraphFormatError(line_no, "expected: wb <v> <edge-id> <float>")
            require_vertex(args[0], line_no)
            b_lines.append((line_no, args[0], args[1], _parse_float(args[2], line_no)))
        else:
            raise GraphFormatError(line_no, f"unknown keyword {keyword!r}")

    if tadpole_ids and not allow_tadpoles:
        raise GraphValidationError(f"tadpoles not allowed here: {', '.join(sorted(tadpole_ids))}")

    g = MetricGraph(name=name, vertices=tuple(vertices), internal_edges=tuple(internal),
                    external_edges=tuple(external), allow_tadpoles=bool(tadpole_ids))

    if not require_data and not (a_weights or c_weights or b_lines):
        return g, None

    b_weights: Dict[str, Dict[Port, float]] = {}
    for line_no, vertex, edge_ref, value in b_lines:
        for port, share in _resolve_ports(g, vertex, edge_ref, line_no):
            b_weights.setdefault(vertex, {})
            b_weights[vertex][port] = b_weights[vertex].get(port, 0.0) + value * share

    # vertices without any wentzell/wb line are reported by validation
    described = set(a_weights) | set(c_weights) | set(b_weights)
    data_a = {v: a_weights.get(v, 0.0) for v in described}
    data_c = {v: c_weights.get(v, 0.0) for v in described}
    data = WentzellData.from_raw(g, data_a, b_weights, data_c)
    return g, data


def _resolve_ports(g: MetricGraph, vertex: str, edge_ref: str, line_no: int) -> List[Tuple[Port, float]]:
    """Ports addressed by a `wb` line, with the share of the value each one receives"""
    internal = g.internal_by_id.get(edge_ref)
    if internal is not None:
        if internal.is_tadpole:
            if internal.tail != vertex:
                raise GraphFormatError(line_no, f"edge {edge_ref} is not incident with {vertex}")
            return [(Port(edge_ref, "-"), 0.5), (Port(edge_ref, "+"), 0.5)]
        if internal.tail == vertex:
            return [(Port(edge_ref, "-"), 1.0)]
        if internal.head == vertex:
            return [(Port(edge_ref, "+"), 1.0)]
        raise GraphFormatError(line_no, f"edge {edge_ref} is not incident with {vertex}")

    external = g.external_by_id.get(edge_ref)
    if external is not None:
        if external.vertex != vertex:
            raise GraphFormatError(line_no, f"edge {edge_ref} is not incident with {vertex}")
        return [(Port(edge_ref, "-"), 1.0)]

    # explicit tadpole end: <id>- or <id>+
    base, end = edge_ref[:-1], edge_ref[-1:]
    tadpole = g.internal_by_id.get(base)
    if end in ("-", "+") and tadpole is not None and tadpole.is_tadpole and tadpole.tail == vertex:
        return [(Port(base, end), 1.0)]
    raise GraphFormatError(line_no, f"unknown edge {edge_ref}")


def load_graph(path: str) -> Tuple[MetricGraph, WentzellData]:
    """Read and parse a graph file (UTF-8)"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    g, data = parse_graph(text)
    if g.name == "graph":
        g = MetricGraph(name=os.path.splitext(os.path.basename(path))[0], vertices=g.vertices,
                        internal_edges=g.internal_edges, external_edges=g.external_edges,
                        allow_tadpoles=g.allow_tadpoles)
    return g, data


def format_graph(g: MetricGraph, data: WentzellData = None) -> str:
    """Write a graph (and optional data) back into the file format"""
    lines = [f"graph {g.name}"]
    lines += [f"vertex {v}" for v in g.vertices]
    for edge in g.internal_edges:
        if edge.is_tadpole:
            lines.append(f"tadpole {edge.id} {edge.tail} {edge.length!r}")
        else:
            lines.append(f"iedge {edge.id} {edge.tail} {edge.head} {edge.length!r}")
    lines += [f"eedge {e.id} {e.vertex}" for e in g.external_edges]
    if data is not None:
        for v in g.vertices:
            d = data[v]
            lines.append(f"wentzell {v} a={d.a!r} c={d.c!r}")
            for port, value in d.b.items():
                internal = g.internal_by_id.get(port.edge_id)
                ref = f"{port.edge_id}{port.end}" if internal is not None and internal.is_tadpole else port.edge_id
                lines.append(f"wb {v} {ref} {value!r}")
    return "\n".join(lines) + "\n"
