#!/usr/bin/env python3
"""
Parallel Runner
Runs a path functional over many pasted paths in fixed batches of path ids, on one process or a
multiprocessing pool, and merges the batch accumulators in batch order
"""

import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, FrozenSet, List, Optional, Tuple

import numpy as np

from estimation.accumulators import MomentAccumulator
from graph_core.metric_graph import GraphPoint
from simulation.paste_engine import PastedProcessSpec, sample_path


DEFAULT_BATCH_SIZE = 1000


@dataclass(frozen=True)
class MonteCarloJob:
    spec: PastedProcessSpec
    start: GraphPoint
    functional: Callable
    horizon: float
    step: float
    seed: int
    halt_on: FrozenSet[str] = frozenset()
    max_crossovers: Optional[int] = None
    record_selections: bool = False
    collect: bool = False


@dataclass
class BatchResult:
    index: int
    accumulator: MomentAccumulator
    values: Optional[np.ndarray] = None


@dataclass
class RunResult:
    accumulator: MomentAccumulator
    values: Optional[np.ndarray] = None
    batches: int = 0
    workers: int = 1
    extra: dict = field(default_factory=dict)


_ACTIVE_JOB: Optional[MonteCarloJob] = None


def _install(job: MonteCarloJob):
    global _ACTIVE_JOB
    _ACTIVE_JOB = job


def run_batch(job: MonteCarloJob, index: int, first: int, last: int) -> BatchResult:
    """Paths first..last-1, each on its own stream"""
    accumulator = MomentAccumulator(job.functional.width)
    collected = [] if job.collect else None
    for path_id in range(first, last):
        record = sample_path(job.spec, job.start, job.horizon, job.step, job.seed, path_id,
                             halt_on=job.halt_on, max_crossovers=job.max_crossovers,
                             record_selections=job.record_selections)
        value = job.functional(record)
        accumulator.add(value)
        if collected is not None:
            collected.append(np.asarray(value, dtype=float))
    values = np.array(collected).reshape(-1, job.functional.width) if collected is not None else None
    return BatchResult(index, accumulator, values)


def _pool_batch(bounds: Tuple[int, int, int]) -> BatchResult:
    index, first, last = bounds
    return run_batch(_ACTIVE_JOB, index, first, last)


def batch_bounds(n_paths: int, batch_size: int = DEFAULT_BATCH_SIZE) -> List[Tuple[int, int, int]]:
    count = int(math.ceil(n_paths / batch_size))
    return [(b, b * batch_size, min((b + 1) * batch_size, n_paths)) for b in range(count)]


def run_job(job: MonteCarloJob, n_paths: int, workers: int = 1,
            batch_size: int = DEFAULT_BATCH_SIZE) -> RunResult:
    """
    Batches are fixed by `batch_size` alone and merged in order, so the result does not depend
    on the worker count.
    """
    if n_paths < 1:
        raise ValueError(f"n_paths must be positive, got {n_paths}")
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    bounds = batch_bounds(n_paths, batch_size)

    if workers == 1 or len(bounds) == 1:
        results = [run_batch(job, *b) for b in bounds]
    else:
        with Pool(processes=min(workers, len(bounds)), initializer=_install, initargs=(job,)) as pool:
            results = pool.map(_pool_batch, bounds)

    results.sort(key=lambda r: r.index)
    total = MomentAccumulator(job.functional.width)
    for result in results:
        total = total.merge(result.accumulator)
    values = np.concatenate([r.values for r in results]) if job.collect else None
    return RunResult(accumulator=total, values=values, batches=len(bounds), workers=workers)
