#!/usr/bin/env python3
"""
Edge Segment Sampler
Brownian motion on an interval with absorbing barriers, Gaussian steps of variance h and
Brownian-bridge crossing correction between grid points
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


MIN_BLOCK = 512
MAX_BLOCK = 65536


class SamplerError(ValueError):
    """Raised for ill-posed sampling requests"""


@dataclass
class EdgeSegment:
    """
    Result of one absorbed run. `exit_side` is "lower", "upper" or None when the run survived to
    the horizon; `end_time` is the exit time (end of the crossing step) or the last grid time.
    """
    exit_side: Optional[str]
    end_time: float
    times: np.ndarray
    positions: np.ndarray

    @property
    def exited(self) -> bool:
        return self.exit_side is not None

    @property
    def end_position(self) -> float:
        return float(self.positions[-1])


def crossing_probability(d_before: np.ndarray, d_after: np.ndarray, step: float) -> np.ndarray:
    """P(a Brownian bridge over one step touches a barrier) given both endpoint distances to it"""
    with np.errstate(over="ignore", invalid="ignore"):
        product = np.where((d_before > 0) & (d_after > 0), d_before * d_after, 0.0)
        return np.where(np.isfinite(product), np.exp(-2.0 * product / step), 0.0)


def _barrier_hits(previous: np.ndarray, current: np.ndarray, barrier: float, sign: float,
                  uniforms: np.ndarray, step: float) -> np.ndarray:
    """Steps that end beyond the barrier or whose bridge touches it"""
    if not math.isfinite(barrier):
        return np.zeros(current.shape, dtype=bool)
    d_before = sign * (previous - barrier)
    d_after = sign * (current - barrier)
    return (d_after <= 0) | (uniforms < crossing_probability(d_before, d_after, step))


def sample_edge_segment(start: float, lower: float, upper: float, step: float,
                        rng: np.random.Generator, horizon: float = math.inf,
                        max_steps: int = None) -> EdgeSegment:
    """
    Run Brownian motion from `start` in (lower, upper) until it leaves the interval or the
    horizon is reached. Either barrier may be infinite, but a finite horizon is required when
    both are. The exit position is clamped to the barrier.
    """
    if step <= 0:
        raise SamplerError(f"time step must be positive, got {step}")
    if not lower < upper:
        raise SamplerError(f"degenerate barriers [{lower}, {upper}]")
    if not (math.isfinite(lower) or math.isfinite(upper) or math.isfinite(horizon) or max_steps):
        raise SamplerError("unbounded run: give a barrier, a horizon or max_steps")

    if start <= lower or start >= upper:
        side = "lower" if start <= lower else "upper"
        position = lower if side == "lower" else upper
        return EdgeSegment(side, 0.0, np.array([0.0]), np.array([position]))

    if math.isfinite(horizon):
        budget = int(math.floor(horizon / step + 1e-9))
    else:
        budget = max_steps if max_steps else np.iinfo(np.int64).max
    if max_steps:
        budget = min(budget, max_steps)

    sqrt_step = math.sqrt(step)
    times = [np.array([0.0])]
    positions = [np.array([float(start)])]
    x = float(start)
    done = 0
    block = MIN_BLOCK

    while done < budget:
        n = int(min(block, budget - done))
        increments = rng.standard_normal(n) * sqrt_step
        uniforms = rng.random((2, n))
        path = x + np.cumsum(increments)
        previous = np.concatenate(([x], path[:-1]))

        hit_lower = _barrier_hits(previous, path, lower, 1.0, uniforms[0], step)
        hit_upper = _barrier_hits(previous, path, upper, -1.0, uniforms[1], step)
        hits = hit_lower | hit_upper
        block_times = step * (done + 1 + np.arange(n))

        if hits.any():
            k = int(np.argmax(hits))
            if hit_lower[k] and hit_upper[k]:
                # both touched within one step: the nearer barrier wins
                side = "lower" if previous[k] - lower <= upper - previous[k] else "upper"
            else:
                side = "lower" if hit_lower[k] else "upper"
            path = path[:k + 1].copy()
            path[-1] = lower if side == "lower" else upper
            times.append(block_times[:k + 1])
            positions.append(path)
            return EdgeSegment(side, float(block_times[k]), np.concatenate(times), np.concatenate(positions))

        times.append(block_times)
        positions.append(path)
        x = float(path[-1])
        done += n
        block = min(2 * block, MAX_BLOCK)

    all_times = np.concatenate(times)
    return EdgeSegment(None, float(all_times[-1]), all_times, np.concatenate(positions))
