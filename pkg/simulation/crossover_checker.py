#!/usr/bin/env python3
"""
Crossover Checker
Path-level runtime checks of the crossover chain and of the cemetery state
"""

import math
from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np

from simulation.paste_engine import CEMETERY, GlobalPathRecord
from simulation.star_sampler import AT_VERTEX


@dataclass
class CrossoverDiagnostics:
    """Violation counts; every field is zero for a sound record"""
    strict_increase: int = 0
    outside_connected: int = 0
    position: int = 0
    hitting: int = 0
    repeated_vertex: int = 0
    kill_location: int = 0
    cemetery_exit: int = 0
    paths: int = 0

    @property
    def total(self) -> int:
        return sum(getattr(self, f.name) for f in fields(self) if f.name != "paths")

    @property
    def ok(self) -> bool:
        return self.total == 0

    def merge(self, other: "CrossoverDiagnostics") -> "CrossoverDiagnostics":
        return CrossoverDiagnostics(**{f.name: getattr(self, f.name) + getattr(other, f.name)
                                       for f in fields(self)})

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


# kill-location tolerance in units of sqrt(h)
KILL_EPSILON_FACTOR = 2.0


def resolution_bound(step: float) -> float:
    """Grid resolution 4 sqrt(h log(1/h))"""
    return 4.0 * math.sqrt(step * math.log(1.0 / step)) if step < 1.0 else 4.0 * math.sqrt(step)


def crossover_count_bound(g, horizon: float) -> float:
    """Non-explosion bound 10 T / m^2 on the crossovers up to T, m the shortest internal edge"""
    lengths = [e.length for e in g.internal_edges]
    if not lengths:
        return math.inf
    return 10.0 * horizon / min(lengths) ** 2


def _distance_to(record: GlobalPathRecord, samples, index: int, vertex: str) -> float:
    if samples.vertices[index] == vertex:
        return 0.0
    edge_id = samples.edge_ids[index]
    if not edge_id:
        return math.inf
    g = record.decomposition.graph
    point = g.point(edge_id, float(samples.xs[index]))
    return g.distance_to_vertex(point, vertex)


def check_crossover(record: GlobalPathRecord, kill_epsilon_factor: float = KILL_EPSILON_FACTOR) -> CrossoverDiagnostics:
    """
    Count violations of: strictly increasing S_n, K_n in V_c, Y(S_n) = K_n at grid resolution,
    no visit of V_c minus K_{n-1} strictly between S_{n-1} and S_n, K_n != K_{n-1} (n >= 2),
    death only from a vertex, and no return from the cemetery.
    """
    report = CrossoverDiagnostics(paths=1)
    crossovers = record.crossovers
    samples = record.samples()
    tolerance = resolution_bound(record.step)
    connected = set(record.connected_vertices)

    previous_time = 0.0
    previous_vertex = crossovers.origin
    for n, (s, k) in enumerate(zip(crossovers.times, crossovers.vertices), start=1):
        if not s > previous_time:
            report.strict_increase += 1
        if k not in connected:
            report.outside_connected += 1
        if n >= 2 and k == previous_vertex:
            report.repeated_vertex += 1

        index = int(np.searchsorted(samples.times, s, side="left"))
        if index >= len(samples.times) or _distance_to(record, samples, index, k) > tolerance:
            report.position += 1

        lo, hi = sorted((previous_time, s))
        between = (samples.times > lo) & (samples.times < hi)
        others = connected - {previous_vertex}
        if any(v in others for v in samples.vertices[between]):
            report.hitting += 1

        previous_time, previous_vertex = s, k

    if record.killed:
        last = record.segments[-1].record
        alive = last.times < last.lifetime
        final_ray = last.rays[~alive][0] if (~alive).any() else last.rays[-1]
        final_distance = last.distances[~alive][0] if (~alive).any() else last.distances[-1]
        if final_ray != AT_VERTEX and final_distance >= kill_epsilon_factor * math.sqrt(record.step):
            report.kill_location += 1

    dead = np.flatnonzero(samples.vertices == CEMETERY)
    if dead.size and not (samples.vertices[dead[0]:] == CEMETERY).all():
        report.cemetery_exit += 1
    return report


def check_many(records: Iterable[GlobalPathRecord],
               kill_epsilon_factor: float = KILL_EPSILON_FACTOR) -> CrossoverDiagnostics:
    total = CrossoverDiagnostics()
    for record in records:
        total = total.merge(check_crossover(record, kill_epsilon_factor))
    return total
