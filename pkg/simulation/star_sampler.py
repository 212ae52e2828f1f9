#!/usr/bin/env python3
"""
Star Path Sampler
Brownian motion on a single-vertex star graph for every vertex regime: traps, hold-and-kill
vertices and sticky Walsh vertices with killing on the local-time scale
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from graph_core.metric_graph import GraphPoint
from graph_core.star_decomposer import Star
from simulation.edge_sampler import (
    MAX_BLOCK, MIN_BLOCK, SamplerError, crossing_probability, sample_edge_segment
)
from wentzell.regime_classifier import RegimeKind, VertexRegime


STOP = "stop"
KILLED = "killed"
HORIZON = "horizon"
VERTEX = "vertex"

AT_VERTEX = -1
DEAD = -2


@dataclass
class SvPathRecord:
    """
    Skeleton of one star path. Sample k sits at `times[k]` on ray `rays[k]` (-1 at the vertex) at
    distance `distances[k]`; `holds[k]` is the time spent held at the vertex right before it.
    """
    times: np.ndarray
    rays: np.ndarray
    distances: np.ndarray
    holds: np.ndarray
    terminal: str
    lifetime: float = math.inf
    hit_ray: Optional[int] = None
    hit_time: Optional[float] = None
    vertex_hit_time: Optional[float] = None
    local_time: float = 0.0
    selections: Optional[np.ndarray] = None

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    @property
    def killed(self) -> bool:
        return self.terminal == KILLED

    def resample(self, grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Positions on a uniform (or any sorted) real-time grid: (rays, distances, alive). Times
        past the lifetime give ray -2 (the cemetery); times past the end repeat the last sample.
        """
        grid = np.asarray(grid, dtype=float)
        index = np.clip(np.searchsorted(self.times, grid, side="right") - 1, 0, len(self.times) - 1)
        rays = self.rays[index].copy()
        distances = self.distances[index].copy()

        following = np.minimum(index + 1, len(self.times) - 1)
        hold_start = self.times[following] - self.holds[following]
        held = (following > index) & (grid >= hold_start) & (self.holds[following] > 0)
        rays[held] = AT_VERTEX
        distances[held] = 0.0

        alive = grid < self.lifetime
        rays[~alive] = DEAD
        distances[~alive] = np.nan
        return rays, distances, alive


def _star_start(star: Star, start) -> Tuple[Optional[int], float]:
    if isinstance(start, GraphPoint):
        if start.is_vertex:
            if start.vertex != star.vertex:
                raise SamplerError(f"start {start} is not on the star of {star.vertex}")
            return None, 0.0
        for ray in star.rays:
            if ray.star_edge_id == start.edge:
                return ray.index, float(start.x)
        raise SamplerError(f"start {start} is not on the star of {star.vertex}")
    ray, distance = start
    if ray is None or distance <= 0.0:
        return None, 0.0
    return int(ray), float(distance)


def sample_sv_path(star: Star, regime: VertexRegime, start: Union[GraphPoint, Tuple[Optional[int], float]],
                   horizon: float, step: float, rng: np.random.Generator,
                   halt_on_vertex: bool = False, record_selections: bool = False) -> SvPathRecord:
    """
    Sample one path of the star process up to the horizon, the first hit of a shadow stop,
    death, or (with `halt_on_vertex`) the first visit of the vertex.
    """
    if step <= 0:
        raise SamplerError(f"time step must be positive, got {step}")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise SamplerError(f"horizon must be positive and finite, got {horizon}")
    if any(d <= 0 for d in star.stop_distances):
        raise SamplerError(f"stop point at the vertex of the star {star.vertex}")

    ray, distance = _star_start(star, start)
    if ray is not None and distance >= star.rays[ray].stop_distance:
        raise SamplerError(f"start distance {distance} at or beyond the stop on ray {ray}")

    if ray is None and halt_on_vertex:
        return SvPathRecord(times=np.array([0.0]), rays=np.array([AT_VERTEX]), distances=np.array([0.0]),
                            holds=np.array([0.0]), terminal=VERTEX, vertex_hit_time=0.0,
                            selections=np.array([], dtype=int) if record_selections else None)

    if regime.kind is RegimeKind.STICKY:
        return _sample_sticky(star, regime, ray, distance, horizon, step, rng,
                              halt_on_vertex, record_selections)
    return _sample_absorbed(star, regime, ray, distance, horizon, step, rng, halt_on_vertex)


class _Skeleton:
    """Growing list of sample chunks"""

    def __init__(self, ray: Optional[int], distance: float):
        self.times: List[np.ndarray] = [np.array([0.0])]
        self.rays: List[np.ndarray] = [np.array([AT_VERTEX if ray is None else ray])]
        self.distances: List[np.ndarray] = [np.array([distance])]
        self.holds: List[np.ndarray] = [np.array([0.0])]

    def extend(self, times, rays, distances, holds):
        self.times.append(np.asarray(times, dtype=float))
        self.rays.append(np.asarray(rays, dtype=int))
        self.distances.append(np.asarray(distances, dtype=float))
        self.holds.append(np.asarray(holds, dtype=float))

    def append(self, time: float, ray: int, distance: float, hold: float = 0.0):
        self.extend([time], [ray], [distance], [hold])

    def record(self, terminal: str, **fields) -> SvPathRecord:
        return SvPathRecord(times=np.concatenate(self.times), rays=np.concatenate(self.rays),
                            distances=np.concatenate(self.distances), holds=np.concatenate(self.holds),
                            terminal=terminal, **fields)


def _sample_absorbed(star: Star, regime: VertexRegime, ray: Optional[int], distance: float,
                     horizon: float, step: float, rng: np.random.Generator,
                     halt_on_vertex: bool) -> SvPathRecord:
    """Trap and hold-kill vertices: absorbed motion on the start ray, then the vertex behaviour"""
    skeleton = _Skeleton(ray, distance)
    arrival = 0.0

    if ray is not None:
        stop = star.rays[ray].stop_distance
        segment = sample_edge_segment(distance, 0.0, stop, step, rng, horizon=horizon)
        rays = np.full(len(segment.times) - 1, ray)
        if segment.exit_side == "lower":
            rays[-1] = AT_VERTEX
        skeleton.extend(segment.times[1:], rays, segment.positions[1:], np.zeros(len(rays)))

        if segment.exit_side == "upper":
            return skeleton.record(STOP, hit_ray=ray, hit_time=segment.end_time)
        if segment.exit_side is None:
            if segment.end_time < horizon:
                skeleton.append(horizon, ray, segment.end_position)
            return skeleton.record(HORIZON)
        arrival = segment.end_time
        if halt_on_vertex:
            return skeleton.record(VERTEX, vertex_hit_time=arrival)

    if regime.kind is RegimeKind.HOLD_KILL:
        hold = rng.exponential(1.0 / regime.hold_rate)
        if arrival + hold <= horizon:
            skeleton.append(arrival + hold, AT_VERTEX, 0.0, hold)
            return skeleton.record(KILLED, lifetime=arrival + hold)

    if horizon > arrival:
        skeleton.append(horizon, AT_VERTEX, 0.0, horizon - arrival)
    return skeleton.record(HORIZON)


def _sample_sticky(star: Star, regime: VertexRegime, ray: Optional[int], distance: float,
                   horizon: float, step: float, rng: np.random.Generator,
                   halt_on_vertex: bool, record_selections: bool) -> SvPathRecord:
    """
    Levy construction: r = beta - min(beta) on the current ray, local time l = -min(beta), the ray
    redrawn from the Walsh weights whenever the running minimum decreases (a vertex visit), real
    time = internal time + rho * l, death once l passes an Exp(gamma) threshold.
    """
    cumulative = regime.cumulative_probabilities
    rho = regime.sticky_delay
    gamma = regime.kill_rate
    stops = np.array(star.stop_distances, dtype=float)
    threshold = rng.exponential(1.0) / gamma if gamma > 0 else math.inf
    sqrt_step = math.sqrt(step)

    skeleton = _Skeleton(ray, distance)
    selections: List[np.ndarray] = []
    current_ray = AT_VERTEX if ray is None else ray
    beta, running_min, dist, ell, t = distance, 0.0, distance, 0.0, 0.0
    block = MIN_BLOCK

    while True:
        n = block
        steps = np.arange(n)
        normals = rng.standard_normal(n)
        uniforms = rng.random((3, n))

        b = beta + sqrt_step * np.cumsum(normals)
        b_prev = np.concatenate(([beta], b[:-1]))
        # exact minimum of the Brownian bridge over each step
        bridge_min = 0.5 * (b_prev + b - np.sqrt((b - b_prev) ** 2 - 2.0 * step * np.log1p(-uniforms[0])))
        m = np.minimum(running_min, np.minimum.accumulate(bridge_min))
        m_prev = np.concatenate(([running_min], m[:-1]))
        new_min = m < m_prev

        choices = np.minimum(np.searchsorted(cumulative, uniforms[1], side="right"), len(cumulative) - 1)
        last_choice = np.maximum.accumulate(np.where(new_min, steps, -1))
        rays = np.where(last_choice >= 0, choices[np.maximum(last_choice, 0)], current_ray)

        dists = b - m
        ells = -m
        ells_prev = np.concatenate(([ell], ells[:-1]))
        holds = rho * (ells - ells_prev)
        times = t + step * (steps + 1) + rho * (ells - ell)
        times_prev = np.concatenate(([t], times[:-1]))

        dists_prev = np.concatenate(([dist], dists[:-1]))
        limits = stops[rays]
        base = np.where(new_min, 0.0, dists_prev)
        crossed = (dists >= limits) | (uniforms[2] < crossing_probability(limits - base, limits - dists, step))

        # (index, priority, time, kind); a vertex arrival precedes death there, death precedes leaving
        events = []
        if halt_on_vertex and new_min.any():
            k = int(np.argmax(new_min))
            events.append((k, 0, times_prev[k] + step, VERTEX))
        if ells[-1] >= threshold:
            k = int(np.argmax(ells >= threshold))
            events.append((k, 1, times_prev[k] + step + rho * (threshold - ells_prev[k]), KILLED))
        if crossed.any():
            k = int(np.argmax(crossed))
            events.append((k, 2, times[k], STOP))
        event = min(events) if events else None
        late = times > horizon
        late_index = int(np.argmax(late)) if late.any() else None

        if event is not None and (late_index is None or event[0] <= late_index) and event[2] <= horizon:
            k, _, when, kind = event
            skeleton.extend(times[:k], rays[:k], dists[:k], holds[:k])
            if record_selections:
                upto = k + 1 if kind == STOP else k
                selections.append(choices[:upto][new_min[:upto]])
            picks = np.concatenate(selections) if record_selections else None

            if kind == VERTEX:
                skeleton.append(when, AT_VERTEX, 0.0)
                return skeleton.record(VERTEX, vertex_hit_time=when, local_time=float(ells_prev[k]),
                                       selections=picks)
            if kind == KILLED:
                skeleton.append(when, AT_VERTEX, 0.0, rho * (threshold - ells_prev[k]))
                return skeleton.record(KILLED, lifetime=when, local_time=float(threshold), selections=picks)
            skeleton.append(when, int(rays[k]), float(limits[k]), float(holds[k]))
            return skeleton.record(STOP, hit_ray=int(rays[k]), hit_time=when,
                                   local_time=float(ells[k]), selections=picks)

        if late_index is not None:
            k = late_index
            skeleton.extend(times[:k], rays[:k], dists[:k], holds[:k])
            if record_selections:
                selections.append(choices[:k][new_min[:k]])
            hold_start = times[k] - holds[k]
            if horizon >= hold_start and holds[k] > 0:
                held = horizon - hold_start
                skeleton.append(horizon, AT_VERTEX, 0.0, held)
                local_time = float(ells_prev[k] + held / rho)
            else:
                before_ray = int(rays[k - 1]) if k > 0 else current_ray
                before_dist = float(dists[k - 1]) if k > 0 else dist
                skeleton.append(horizon, before_ray, before_dist)
                local_time = float(ells_prev[k])
            return skeleton.record(HORIZON, local_time=local_time,
                                   selections=np.concatenate(selections) if record_selections else None)

        skeleton.extend(times, rays, dists, holds)
        if record_selections:
            selections.append(choices[new_min])
        beta, running_min = float(b[-1]), float(m[-1])
        current_ray, dist, ell, t = int(rays[-1]), float(dists[-1]), float(ells[-1]), float(times[-1])
        block = min(2 * block, MAX_BLOCK)
