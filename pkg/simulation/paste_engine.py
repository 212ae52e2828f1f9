#!/usr/bin/env python3
"""
Paste Engine
Builds Brownian motion on a whole metric graph by running star processes one after another,
handing over at shadow points under the crossover chain (S_n, K_n)
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from graph_core.metric_graph import GraphPoint, GraphValidationError, MetricGraph, Port
from graph_core.star_decomposer import StarDecomposition, decompose_to_stars
from simulation.edge_sampler import SamplerError
from simulation.rng_streams import path_stream
from simulation.star_sampler import (
    AT_VERTEX, DEAD, HORIZON, KILLED, VERTEX, SvPathRecord, sample_sv_path
)
from wentzell.regime_classifier import RegimeKind, VertexRegime, classify_all
from wentzell.wentzell_data import WentzellData, WentzellViolationError, validate


HALTED = "halted"
TRUNCATED = "truncated"
ATTACHMENTS = ("nearest", "initial", "final")
CEMETERY = "Δ"


@dataclass(frozen=True)
class PastedProcessSpec:
    """Everything needed to sample the pasted process; shared read-only across workers"""
    graph: MetricGraph
    data: WentzellData
    decomposition: StarDecomposition
    regimes: Dict[str, VertexRegime]
    attachment: str = "nearest"

    @property
    def connected_vertices(self) -> Tuple[str, ...]:
        """V_c: vertices incident with at least one internal edge"""
        return tuple(v for v in self.graph.vertices if self.graph.is_connected_vertex(v))

    def stop_count(self, vertex: str) -> int:
        return len(self.decomposition[vertex].shadow_points)

    def continues_after_vertex(self, vertex: str) -> bool:
        """False when reaching the vertex ends the path for good (hold-kill death or a trap)"""
        return self.regimes[vertex].kind is RegimeKind.STICKY

    def owner(self, point: GraphPoint) -> Tuple[str, Optional[int], float]:
        """(star vertex, ray index, distance) of the star that starts a path at `point`"""
        g = self.graph
        if point.is_vertex:
            return point.vertex, None, 0.0
        external = g.external_by_id.get(point.edge)
        if external is not None:
            star = self.decomposition[external.vertex]
            return external.vertex, star.ray_for_port(Port(point.edge, "-")).index, point.x

        edge = g.internal_by_id[point.edge]
        if self.attachment == "initial":
            use_tail = True
        elif self.attachment == "final":
            use_tail = False
        else:
            use_tail = point.x <= edge.length / 2.0
        if use_tail:
            star = self.decomposition[edge.tail]
            return edge.tail, star.ray_for_port(Port(edge.id, "-")).index, point.x
        star = self.decomposition[edge.head]
        return edge.head, star.ray_for_port(Port(edge.id, "+")).index, edge.length - point.x

    def describe(self) -> List[str]:
        return [f"{v}: {len(self.decomposition[v].rays)} rays, {self.stop_count(v)} stops, "
                f"{self.regimes[v].describe()}" for v in self.graph.vertices]


def build_process(g: MetricGraph, data: WentzellData, attachment: str = "nearest") -> PastedProcessSpec:
    """Validate, split into stars and classify every vertex"""
    if attachment not in ATTACHMENTS:
        raise ValueError(f"attachment must be one of {', '.join(ATTACHMENTS)}, got {attachment!r}")
    if g.has_tadpoles:
        raise GraphValidationError("graph contains tadpoles (expand them first)")
    violations = validate(data, g)
    if violations:
        raise WentzellViolationError(violations)
    return PastedProcessSpec(graph=g, data=data, decomposition=decompose_to_stars(g, data),
                             regimes=classify_all(g, data), attachment=attachment)


@dataclass
class CrossoverRecord:
    """Crossover times S_1 < S_2 < ... and vertices K_1, K_2, ...; `origin` is K_0 (None off the vertices)"""
    origin: Optional[str]
    times: List[float] = field(default_factory=list)
    vertices: List[str] = field(default_factory=list)
    terminal: str = HORIZON

    def __len__(self) -> int:
        return len(self.times)

    def first(self) -> Tuple[float, str]:
        """(S_1, K_1), or (inf, Δ) when no crossover happened"""
        if not self.times:
            return math.inf, CEMETERY
        return self.times[0], self.vertices[0]


@dataclass
class Segment:
    """One star run: the star vertex, its skeleton and the real time at which it started"""
    vertex: str
    record: SvPathRecord
    offset: float


@dataclass
class GlobalSamples:
    times: np.ndarray
    edge_ids: np.ndarray
    xs: np.ndarray
    vertices: np.ndarray
    alive: np.ndarray
    stars: np.ndarray


@dataclass
class GlobalPathRecord:
    path_id: int
    start: GraphPoint
    segments: List[Segment]
    crossovers: CrossoverRecord
    terminal: str
    step: float
    horizon: float
    connected_vertices: Tuple[str, ...]
    decomposition: StarDecomposition
    lifetime: float = math.inf
    halted_vertex: Optional[str] = None
    halt_time: Optional[float] = None

    @property
    def killed(self) -> bool:
        return self.terminal == KILLED

    @property
    def local_time(self) -> Dict[str, float]:
        """Total local time accumulated at each vertex"""
        totals: Dict[str, float] = {}
        for segment in self.segments:
            totals[segment.vertex] = totals.get(segment.vertex, 0.0) + segment.record.local_time
        return totals

    def samples(self) -> GlobalSamples:
        """Skeleton samples in graph coordinates; the first sample of each later segment repeats
        the previous stop and is dropped"""
        chunks = []
        for n, segment in enumerate(self.segments):
            rec = segment.record
            skip = 1 if n > 0 else 0
            chunks.append(self._to_global(segment.vertex, segment.offset + rec.times[skip:],
                                          rec.rays[skip:], rec.distances[skip:]))
        samples = GlobalSamples(*[np.concatenate([getattr(c, name) for c in chunks])
                                  for name in ("times", "edge_ids", "xs", "vertices", "alive", "stars")])
        dead = samples.times >= self.lifetime
        samples.alive[dead] = False
        samples.edge_ids[dead] = ""
        samples.xs[dead] = np.nan
        samples.vertices[dead] = CEMETERY
        return samples

    def resample(self, grid) -> GlobalSamples:
        """Positions on a real-time grid, Δ after the lifetime"""
        grid = np.asarray(grid, dtype=float)
        offsets = np.array([s.offset for s in self.segments])
        owner = np.clip(np.searchsorted(offsets, grid, side="right") - 1, 0, len(self.segments) - 1)
        chunks = []
        for n, segment in enumerate(self.segments):
            local = grid[owner == n]
            if local.size == 0:
                continue
            rays, distances, alive = segment.record.resample(local - segment.offset)
            chunk = self._to_global(segment.vertex, local, rays, distances)
            chunk.alive &= alive & (local < self.lifetime)
            chunks.append(chunk)
        result = GlobalSamples(*[np.concatenate([getattr(c, name) for c in chunks])
                                 for name in ("times", "edge_ids", "xs", "vertices", "alive", "stars")])
        result.edge_ids[~result.alive] = ""
        result.xs[~result.alive] = np.nan
        result.vertices[~result.alive] = CEMETERY
        return result

    def _to_global(self, vertex: str, times, rays, distances) -> GlobalSamples:
        star = self.decomposition[vertex]
        g = self.decomposition.graph
        count = len(times)
        edge_ids = np.full(count, "", dtype=object)
        xs = np.full(count, np.nan)
        vertices = np.full(count, "", dtype=object)
        alive = np.asarray(rays) != DEAD

        at_vertex = np.asarray(rays) == AT_VERTEX
        vertices[at_vertex] = vertex
        xs[at_vertex] = 0.0
        for ray in star.rays:
            on_ray = np.asarray(rays) == ray.index
            if not on_ray.any():
                continue
            d = np.asarray(distances)[on_ray]
            x = d if ray.port.end == "-" else ray.length - d
            edge_ids[on_ray] = ray.port.edge_id
            xs[on_ray] = x
            tolerance = 1e-12 * max(1.0, ray.length if math.isfinite(ray.length) else 1.0)
            near = np.zeros(d.shape, dtype=bool)
            ends = np.empty(d.shape, dtype=object)
            near_vertex = d <= tolerance
            near[near_vertex] = True
            ends[near_vertex] = vertex
            if ray.is_internal:
                near_far = np.abs(d - ray.length) <= tolerance
                near[near_far] = True
                ends[near_far] = ray.target
            if near.any():
                indices = np.flatnonzero(on_ray)[near]
                vertices[indices] = ends[near]
                edge_ids[indices] = ""
                xs[indices] = 0.0
        stars = np.full(count, vertex, dtype=object)
        return GlobalSamples(np.asarray(times, dtype=float), edge_ids, xs, vertices, alive, stars)


def sample_path(spec: PastedProcessSpec, start: GraphPoint, horizon: float, step: float,
                seed: int, path_id: int = 0, halt_on: Iterable[str] = (),
                max_crossovers: int = None, record_selections: bool = False) -> GlobalPathRecord:
    """
    Sample one pasted path. Crossover n runs on stream (seed, path_id, n). With `halt_on` the path
    ends at its first visit of any listed vertex (terminal "halted"). From a start off the vertices,
    S_1 is the first visit of any connected vertex, the owning star's own vertex included.
    """
    if not (horizon > 0 and math.isfinite(horizon)):
        raise SamplerError(f"horizon must be positive and finite, got {horizon}")
    halt_on = set(halt_on)
    vertex, ray, distance = spec.owner(start)
    crossovers = CrossoverRecord(origin=start.vertex)
    # the owner vertex is a crossover target only until the first crossover
    entry_pending = not start.is_vertex and vertex in spec.connected_vertices
    segments: List[Segment] = []
    offset = 0.0
    n = 0

    def finish(terminal, **fields) -> GlobalPathRecord:
        crossovers.terminal = terminal
        return GlobalPathRecord(path_id=path_id, start=start, segments=segments, crossovers=crossovers,
                                terminal=terminal, step=step, horizon=horizon,
                                connected_vertices=spec.connected_vertices,
                                decomposition=spec.decomposition, **fields)

    while True:
        star = spec.decomposition[vertex]
        record = sample_sv_path(star, spec.regimes[vertex], (ray, distance), horizon - offset, step,
                                path_stream(seed, path_id, n),
                                halt_on_vertex=vertex in halt_on or entry_pending,
                                record_selections=record_selections)
        segments.append(Segment(vertex, record, offset))

        if record.terminal == KILLED:
            return finish(KILLED, lifetime=offset + record.lifetime)
        if record.terminal == VERTEX and not entry_pending:
            return finish(HALTED, halted_vertex=vertex, halt_time=offset + record.vertex_hit_time)
        if record.terminal == HORIZON:
            return finish(HORIZON)

        if record.terminal == VERTEX:
            target = vertex
            offset += record.vertex_hit_time
        else:
            target = star.rays[record.hit_ray].target
            offset += record.hit_time
        entry_pending = False
        crossovers.times.append(offset)
        crossovers.vertices.append(target)
        n += 1
        if target in halt_on:
            return finish(HALTED, halted_vertex=target, halt_time=offset)
        if offset >= horizon:
            return finish(HORIZON)
        if max_crossovers is not None and n >= max_crossovers:
            return finish(TRUNCATED)
        vertex, ray, distance = target, None, 0.0
