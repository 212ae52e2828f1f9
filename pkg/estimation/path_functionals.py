#!/usr/bin/env python3
"""
Path Functionals
Per-path quantities averaged by the estimators; each functional maps one pasted path to a
fixed-width vector
"""

import math
from typing import List, Sequence

import numpy as np

from resolvent.graph_functions import GraphFunction
from simulation.paste_engine import GlobalPathRecord, HALTED


def sample_values(f: GraphFunction, edge_ids: np.ndarray, xs: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """f at global sample positions (rows with a vertex use the vertex value)"""
    values = np.zeros(len(xs))
    at_vertex = vertices != ""
    for vertex in set(vertices[at_vertex]):
        values[vertices == vertex] = f.vertex_value(vertex)
    on_edges = ~at_vertex
    for edge_id in set(edge_ids[on_edges]):
        rows = on_edges & (edge_ids == edge_id)
        values[rows] = f.edge_values(edge_id, xs[rows])
    return values


def discounted_integral(record: GlobalPathRecord, f: GraphFunction, lam: float) -> float:
    """
    Integral of exp(-lam t) f(X_t) over [0, lifetime ∧ horizon]: trapezoid over each diffusive step,
    exact integral over the time held at a vertex
    """
    total = 0.0
    for segment in record.segments:
        sv = segment.record
        if len(sv.times) < 2:
            continue
        positions = record._to_global(segment.vertex, segment.offset + sv.times, sv.rays, sv.distances)
        values = sample_values(f, positions.edge_ids, positions.xs, positions.vertices)
        values = np.where(np.isnan(values), 0.0, values)

        times = positions.times
        holds = sv.holds[1:]
        arrive = times[1:] - holds
        diffusive = 0.5 * (arrive - times[:-1]) * (np.exp(-lam * times[:-1]) * values[:-1]
                                                    + np.exp(-lam * arrive) * values[1:])
        held = f.vertex_value(segment.vertex) * (np.exp(-lam * arrive) - np.exp(-lam * times[1:])) / lam
        total += float(diffusive.sum() + held[holds > 0].sum())
    return total


class DiscountedIntegral:
    """Resolvent functional for one (f, lambda)"""

    def __init__(self, f: GraphFunction, lam: float):
        self.f = f
        self.lam = lam
        self.width = 1

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        return np.array([discounted_integral(record, self.f, self.lam)])


class HittingTransform:
    """exp(-lam H) on the coordinate of the first target reached; zeros when none was reached"""

    def __init__(self, targets: Sequence[str], lam: float):
        self.targets = list(targets)
        self.lam = lam
        self.width = len(self.targets)

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        values = np.zeros(self.width)
        if record.terminal == HALTED and record.halted_vertex in self.targets:
            values[self.targets.index(record.halted_vertex)] = math.exp(-self.lam * record.halt_time)
        return values


class FirstPassageTransform:
    """exp(-lam H) with H the first visit of any target; 0 when none was reached"""
    width = 1

    def __init__(self, targets: Sequence[str], lam: float):
        self.targets = set(targets)
        self.lam = lam

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        if record.terminal == HALTED and record.halted_vertex in self.targets:
            return np.array([math.exp(-self.lam * record.halt_time)])
        return np.zeros(1)


class LifetimeFunctional:
    """Lifetime capped at the horizon, plus a killed-within-horizon indicator"""
    width = 2

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        if record.killed:
            return np.array([record.lifetime, 1.0])
        return np.array([record.horizon, 0.0])


class ChainTransform:
    """
    exp(-lam S_n) 1{K_n = w} for every lam in the grid and every target w (lam-major order),
    followed by a 1{S_n reached} column. Paths without an n-th crossover contribute zeros.
    """

    def __init__(self, targets: Sequence[str], lam_grid: Sequence[float], order: int = 1):
        self.targets = list(targets)
        self.lam_grid = [float(lam) for lam in lam_grid]
        self.order = order
        self.width = len(self.targets) * len(self.lam_grid) + 1

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        values = np.zeros((len(self.lam_grid), len(self.targets)))
        crossovers = record.crossovers
        reached = len(crossovers) >= self.order
        if reached:
            s = crossovers.times[self.order - 1]
            k = crossovers.vertices[self.order - 1]
            if k in self.targets:
                values[:, self.targets.index(k)] = np.exp(-np.array(self.lam_grid) * s)
        return np.append(values.reshape(-1), 1.0 if reached else 0.0)


class FirstCrossover:
    """(S_1, index of K_1 among the targets); (-1, -1) when no crossover happened"""
    width = 2

    def __init__(self, targets: Sequence[str]):
        self.targets = list(targets)

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        s, k = record.crossovers.first()
        if not math.isfinite(s):
            return np.array([-1.0, -1.0])
        return np.array([s, float(self.targets.index(k)) if k in self.targets else -1.0])


class RayCounts:
    """Number of Walsh ray selections per ray made by the first star run"""

    def __init__(self, ray_count: int):
        self.width = ray_count

    def __call__(self, record: GlobalPathRecord) -> np.ndarray:
        picks = record.segments[0].record.selections
        if picks is None:
            return np.zeros(self.width)
        return np.bincount(picks, minlength=self.width).astype(float)[: self.width]


def labels_for(functional, prefix: str = "") -> List[str]:
    if isinstance(functional, ChainTransform):
        return [f"{prefix}lambda={lam:g},K={w}" for lam in functional.lam_grid for w in functional.targets] + [f"{prefix}reached"]
    if isinstance(functional, HittingTransform):
        return [f"{prefix}{w}" for w in functional.targets]
    return [f"{prefix}{i}" for i in range(functional.width)]
