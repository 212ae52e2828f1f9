#!/usr/bin/env python3
"""
Resolvent Solver
Solves (lambda - u''/2) = f on a metric graph under Wentzell vertex conditions: a Dirichlet
particular solution on every edge plus decaying exponentials fixed by one linear system
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy import integrate, linalg

from graph_core.metric_graph import GraphPoint, MetricGraph, Port
from resolvent.graph_functions import GraphFunction
from resolvent.kernels import dirichlet_kernel_closed, flux_kernel_end, flux_kernel_start, rate
from wentzell.wentzell_data import WentzellData, WentzellViolationError, validate


QUAD_TOLERANCE = 1e-10
QUAD_LIMIT = 200
CONDITION_LIMIT = 1e14


class SingularSystemError(ValueError):
    """Raised when the vertex system cannot be solved reliably"""

    def __init__(self, condition: float, message: str = "singular vertex system"):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3g})")


def _quad(func, lo: float, hi: float, hints: List[float], tolerance: float, limit: int) -> float:
    """Adaptive quadrature on [lo, hi] (hi may be inf), split at the hint points"""
    if hi <= lo:
        return 0.0
    inner = sorted(p for p in hints if lo < p < hi)
    if math.isfinite(hi):
        value, _ = integrate.quad(func, lo, hi, points=inner or None, epsabs=tolerance,
                                  epsrel=tolerance, limit=limit)
        return value
    cut = inner[-1] if inner else lo
    head = _quad(func, lo, cut, inner[:-1], tolerance, limit) if cut > lo else 0.0
    tail, _ = integrate.quad(func, cut, math.inf, epsabs=tolerance, epsrel=tolerance, limit=limit)
    return head + tail


@dataclass
class ResolventSolution:
    """
    u = R_lambda f. On internal edge i: u = phi_i + alpha_i exp(-kx) + beta_i exp(-k(a_i - x)); on
    external edge e: u = phi_e + alpha_e exp(-kx); phi is the Dirichlet particular solution.
    """
    lam: float
    graph: MetricGraph
    f: GraphFunction
    coefficients: Dict[str, Tuple[float, ...]]
    vertex_values: Dict[str, float]
    fluxes: Dict[Port, float]
    condition: float
    tolerance: float = QUAD_TOLERANCE
    limit: int = QUAD_LIMIT
    _cache: Dict[Tuple[str, float], float] = field(default_factory=dict, repr=False)

    @property
    def k(self) -> float:
        return rate(self.lam)

    def particular(self, edge_id: str, x: float) -> float:
        """phi(x) = integral of r^D(x, y) f(y) dy over the edge"""
        key = (edge_id, float(x))
        if key in self._cache:
            return self._cache[key]
        length = self.graph.edge_length(edge_id)
        if x <= 0.0 or x >= length:
            return 0.0
        f = self.f

        def integrand(y):
            return dirichlet_kernel_closed(length, self.lam, x, y) * f.edge_values(edge_id, [y])[0]

        hints = f.breakpoints(edge_id) + [x]
        value = _quad(integrand, 0.0, length, hints, self.tolerance, self.limit)
        self._cache[key] = value
        return value

    def homogeneous(self, edge_id: str, x) -> np.ndarray:
        k = self.k
        x = np.asarray(x, dtype=float)
        coefficients = self.coefficients[edge_id]
        if len(coefficients) == 1:
            return coefficients[0] * np.exp(-k * x)
        length = self.graph.edge_length(edge_id)
        return coefficients[0] * np.exp(-k * x) + coefficients[1] * np.exp(-k * (length - x))

    def edge_values(self, edge_id: str, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        particular = np.array([self.particular(edge_id, xi) for xi in x])
        return particular + self.homogeneous(edge_id, x)

    def value_at(self, point: GraphPoint) -> float:
        if point.is_vertex:
            return self.vertex_values[point.vertex]
        return float(self.edge_values(point.edge, [point.x])[0])

    def port_value(self, port: Port) -> float:
        """Limit of u at the vertex end of a port"""
        length = self.graph.edge_length(port.edge_id)
        x = 0.0 if port.end == "-" else length
        return float(self.homogeneous(port.edge_id, x))

    def inward_derivative(self, port: Port) -> float:
        k = self.k
        coefficients = self.coefficients[port.edge_id]
        if len(coefficients) == 1:
            return self.fluxes[port] - k * coefficients[0]
        decay = math.exp(-k * self.graph.edge_length(port.edge_id))
        alpha, beta = coefficients
        if port.end == "-":
            return self.fluxes[port] - k * alpha + k * beta * decay
        return self.fluxes[port] + k * alpha * decay - k * beta

    def as_graph_function(self) -> GraphFunction:
        """u as an input function for another solve"""
        pieces = {edge_id: _SolutionPiece(self, edge_id) for edge_id in self.graph.edge_ids}
        return GraphFunction(pieces, dict(self.vertex_values), name=f"R({self.lam:g}){self.f.name}")

    def sample_rows(self, points_per_edge: int = 11, external_extent: float = 5.0) -> List[Dict]:
        """Rows (edge_id, x, u) on a uniform grid per edge; external edges up to `external_extent`"""
        rows = []
        for edge_id in self.graph.edge_ids:
            length = self.graph.edge_length(edge_id)
            end = length if math.isfinite(length) else external_extent
            xs = np.linspace(0.0, end, points_per_edge)
            for x, u in zip(xs, self.edge_values(edge_id, xs)):
                rows.append({"edge_id": edge_id, "x": float(x), "u": float(u)})
        return rows


class _SolutionPiece:
    def __init__(self, solution: ResolventSolution, edge_id: str):
        self.solution = solution
        self.edge_id = edge_id

    def __call__(self, x):
        return self.solution.edge_values(self.edge_id, x)


def _unknown_layout(g: MetricGraph) -> Dict[str, Tuple[int, ...]]:
    layout = {}
    index = 0
    for edge in g.internal_edges:
        layout[edge.id] = (index, index + 1)
        index += 2
    for edge in g.external_edges:
        layout[edge.id] = (index,)
        index += 1
    return layout


def boundary_fluxes(g: MetricGraph, f: GraphFunction, lam: float,
                    tolerance: float = QUAD_TOLERANCE, limit: int = QUAD_LIMIT) -> Dict[Port, float]:
    """Inward derivatives of the Dirichlet particular solution at every port"""
    fluxes = {}
    for edge in g.internal_edges:
        hints = f.breakpoints(edge.id)
        values = (lambda y, e=edge: f.edge_values(e.id, [y])[0])
        fluxes[Port(edge.id, "-")] = _quad(lambda y: flux_kernel_start(edge.length, lam, y) * values(y),
                                           0.0, edge.length, hints, tolerance, limit)
        fluxes[Port(edge.id, "+")] = _quad(lambda y: flux_kernel_end(edge.length, lam, y) * values(y),
                                           0.0, edge.length, hints, tolerance, limit)
    for edge in g.external_edges:
        hints = f.breakpoints(edge.id)
        fluxes[Port(edge.id, "-")] = _quad(
            lambda y, e=edge: flux_kernel_start(math.inf, lam, y) * f.edge_values(e.id, [y])[0],
            0.0, math.inf, hints, tolerance, limit)
    return fluxes


def solve_resolvent(g: MetricGraph, data: WentzellData, f: GraphFunction, lam: float,
                    tolerance: float = QUAD_TOLERANCE, limit: int = QUAD_LIMIT) -> ResolventSolution:
    """
    Unknowns: two coefficients per internal edge, one per external edge. Per vertex of degree d:
    d - 1 continuity equations and (a + c lambda) u(v) - sum_l b_l u'(v_l) = c f(v).
    """
    k = rate(lam)
    violations = validate(data, g)
    if violations:
        raise WentzellViolationError(violations)

    layout = _unknown_layout(g)
    size = sum(len(v) for v in layout.values())
    fluxes = boundary_fluxes(g, f, lam, tolerance, limit)

    def value_row(port: Port) -> np.ndarray:
        row = np.zeros(size)
        columns = layout[port.edge_id]
        if len(columns) == 1:
            row[columns[0]] = 1.0
            return row
        decay = math.exp(-k * g.edge_length(port.edge_id))
        if port.end == "-":
            row[columns[0]], row[columns[1]] = 1.0, decay
        else:
            row[columns[0]], row[columns[1]] = decay, 1.0
        return row

    def derivative_row(port: Port) -> np.ndarray:
        row = np.zeros(size)
        columns = layout[port.edge_id]
        if len(columns) == 1:
            row[columns[0]] = -k
            return row
        decay = math.exp(-k * g.edge_length(port.edge_id))
        if port.end == "-":
            row[columns[0]], row[columns[1]] = -k, k * decay
        else:
            row[columns[0]], row[columns[1]] = k * decay, -k
        return row

    matrix = []
    rhs = []
    for v in g.vertices:
        ports = g.ports(v)
        d = data[v]
        first = value_row(ports[0])
        for port in ports[1:]:
            matrix.append(value_row(port) - first)
            rhs.append(0.0)
        row = (d.a + d.c * lam) * first
        target = d.c * f.vertex_value(v)
        for port in ports:
            weight = d.b.get(port, 0.0)
            row = row - weight * derivative_row(port)
            target += weight * fluxes[port]
        matrix.append(row)
        rhs.append(target)

    A = np.array(matrix)
    b = np.array(rhs)
    condition = float(np.linalg.cond(A))
    if not math.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSystemError(condition)
    try:
        solution = linalg.solve(A, b)
    except linalg.LinAlgError as e:
        raise SingularSystemError(condition, str(e))

    coefficients = {edge_id: tuple(float(solution[c]) for c in columns) for edge_id, columns in layout.items()}
    vertex_values = {v: float(value_row(g.ports(v)[0]) @ solution) for v in g.vertices}
    return ResolventSolution(lam=lam, graph=g, f=f, coefficients=coefficients, vertex_values=vertex_values,
                             fluxes=fluxes, condition=condition, tolerance=tolerance, limit=limit)


@dataclass
class DomainReport:
    residuals: Dict[str, float]
    continuity_gap: float

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals.values()), default=0.0)

    def worst_vertex(self) -> str:
        return max(self.residuals, key=lambda v: abs(self.residuals[v]))


def check_domain(solution: ResolventSolution, data: WentzellData, f: GraphFunction, lam: float) -> DomainReport:
    """
    Residual a u(v) - sum_l b_l u'(v_l) + c u''(v)/2 per vertex with u''(v) = 2(lambda u(v) - f(v)),
    plus the largest continuity gap between incident edges
    """
    g = solution.graph
    residuals = {}
    gap = 0.0
    for v in g.vertices:
        d = data[v]
        u = solution.vertex_values[v]
        flux = sum(d.b.get(port, 0.0) * solution.inward_derivative(port) for port in g.ports(v))
        second = 2.0 * (lam * u - f.vertex_value(v))
        residuals[v] = d.a * u - flux + 0.5 * d.c * second
        for port in g.ports(v):
            gap = max(gap, abs(solution.port_value(port) - u))
    return DomainReport(residuals=residuals, continuity_gap=gap)
