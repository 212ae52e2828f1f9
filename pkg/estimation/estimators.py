#!/usr/bin/env python3
"""
Monte-Carlo Estimators
Resolvent, hitting Laplace transform, lifetime and Walsh ray-frequency estimates over pasted paths
"""

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from estimation.accumulators import Estimate
from estimation.parallel_runner import DEFAULT_BATCH_SIZE, MonteCarloJob, run_job
from estimation.path_functionals import (
    DiscountedIntegral, FirstPassageTransform, HittingTransform, LifetimeFunctional, RayCounts
)
from graph_core.metric_graph import GraphPoint
from resolvent.graph_functions import GraphFunction
from simulation.paste_engine import PastedProcessSpec


# lambda * T below this leaves a truncation bias exp(-lambda T) above the statistical noise
MIN_DISCOUNTED_HORIZON = 20.0


class HorizonTruncationWarning(UserWarning):
    """Horizon too short for the discount rate"""


def check_horizon(lam: float, horizon: float, allow_short_horizon: bool = False) -> bool:
    """Warn when lambda * T < 20; returns False in that case"""
    if lam * horizon >= MIN_DISCOUNTED_HORIZON:
        return True
    if not allow_short_horizon:
        warnings.warn(f"lambda*T = {lam * horizon:.3g} < {MIN_DISCOUNTED_HORIZON:g}: truncation bias "
                      f"exp(-lambda T) = {math.exp(-lam * horizon):.2e}", HorizonTruncationWarning, stacklevel=3)
    return False


def estimate_resolvent(spec: PastedProcessSpec, start: GraphPoint, f: GraphFunction, lam: float,
                       n_paths: int, horizon: float, step: float, seed: int, workers: int = 1,
                       batch_size: int = DEFAULT_BATCH_SIZE, allow_short_horizon: bool = False) -> Estimate:
    """Mean over paths of the integral of exp(-lam t) f(X_t) up to death or the horizon"""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    check_horizon(lam, horizon, allow_short_horizon)
    job = MonteCarloJob(spec=spec, start=start, functional=DiscountedIntegral(f, lam),
                        horizon=horizon, step=step, seed=seed)
    result = run_job(job, n_paths, workers, batch_size)
    return result.accumulator.estimate(seed=seed, step=step, label=f"R({lam:g}){f.name}@{start}")


def _checked_targets(spec: PastedProcessSpec, targets: Iterable[str]) -> List[str]:
    targets = list(targets)
    if not targets:
        raise ValueError("targets must not be empty")
    unknown = [v for v in targets if v not in spec.graph.vertices]
    if unknown:
        raise ValueError(f"unknown target vertices: {', '.join(unknown)}")
    return targets


def estimate_hitting_lt(spec: PastedProcessSpec, start: GraphPoint, lam: float, targets: Iterable[str],
                        n_paths: int, horizon: float, step: float, seed: int, workers: int = 1,
                        batch_size: int = DEFAULT_BATCH_SIZE,
                        allow_short_horizon: bool = False) -> Dict[str, Estimate]:
    """Per target: mean of exp(-lam H) 1{the first target reached is this one}"""
    targets = _checked_targets(spec, targets)
    check_horizon(lam, horizon, allow_short_horizon)
    job = MonteCarloJob(spec=spec, start=start, functional=HittingTransform(targets, lam),
                        horizon=horizon, step=step, seed=seed, halt_on=frozenset(targets))
    accumulator = run_job(job, n_paths, workers, batch_size).accumulator
    return {v: accumulator.estimate(i, seed, step, f"E exp(-{lam:g}H); {v}") for i, v in enumerate(targets)}


def estimate_first_passage_lt(spec: PastedProcessSpec, start: GraphPoint, lam: float, targets: Iterable[str],
                             n_paths: int, horizon: float, step: float, seed: int, workers: int = 1,
                             batch_size: int = DEFAULT_BATCH_SIZE,
                             allow_short_horizon: bool = False) -> Estimate:
    """Mean of exp(-lam H_V) for the first visit H_V of the target set"""
    targets = _checked_targets(spec, targets)
    check_horizon(lam, horizon, allow_short_horizon)
    job = MonteCarloJob(spec=spec, start=start, functional=FirstPassageTransform(targets, lam),
                        horizon=horizon, step=step, seed=seed, halt_on=frozenset(targets))
    accumulator = run_job(job, n_paths, workers, batch_size).accumulator
    return accumulator.estimate(0, seed, step, f"E exp(-{lam:g}H_V)")


@dataclass
class LifetimeSample:
    lifetimes: np.ndarray
    killed: np.ndarray
    horizon: float

    @property
    def censored(self) -> int:
        return int((~self.killed).sum())


def collect_lifetimes(spec: PastedProcessSpec, start: GraphPoint, n_paths: int, horizon: float,
                      step: float, seed: int, workers: int = 1,
                      batch_size: int = DEFAULT_BATCH_SIZE) -> LifetimeSample:
    """Lifetimes (capped at the horizon) and killed flags, in path-id order"""
    job = MonteCarloJob(spec=spec, start=start, functional=LifetimeFunctional(), horizon=horizon,
                        step=step, seed=seed, collect=True)
    values = run_job(job, n_paths, workers, batch_size).values
    return LifetimeSample(lifetimes=values[:, 0], killed=values[:, 1] > 0.5, horizon=horizon)


def estimate_lifetime(spec: PastedProcessSpec, start: GraphPoint, n_paths: int, horizon: float,
                      step: float, seed: int, workers: int = 1,
                      batch_size: int = DEFAULT_BATCH_SIZE) -> Estimate:
    """Mean of the lifetime capped at the horizon (choose the horizon so censoring is negligible)"""
    job = MonteCarloJob(spec=spec, start=start, functional=LifetimeFunctional(), horizon=horizon,
                        step=step, seed=seed)
    accumulator = run_job(job, n_paths, workers, batch_size).accumulator
    censored = n_paths - int(round(accumulator.mean[1] * n_paths))
    if censored:
        warnings.warn(f"{censored} of {n_paths} paths outlived the horizon {horizon:g}",
                      HorizonTruncationWarning, stacklevel=2)
    return accumulator.estimate(0, seed, step, "lifetime")


@dataclass
class RayFrequencies:
    vertex: str
    counts: np.ndarray
    expected: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.total, 1)

    @property
    def z_scores(self) -> np.ndarray:
        """Binomial z-score of each ray frequency against its Walsh weight"""
        spread = np.sqrt(self.expected * (1.0 - self.expected) / max(self.total, 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (self.frequencies - self.expected) / spread
        return np.where(spread > 0, z, 0.0)

    def rows(self) -> List[Dict]:
        return [{"ray": i, "count": int(c), "frequency": float(p), "expected": float(q), "z": float(z)}
                for i, (c, p, q, z) in enumerate(zip(self.counts, self.frequencies, self.expected, self.z_scores))]


def estimate_ray_frequencies(spec: PastedProcessSpec, vertex: str, n_paths: int, horizon: float,
                             step: float, seed: int, workers: int = 1,
                             batch_size: int = DEFAULT_BATCH_SIZE) -> RayFrequencies:
    """Walsh ray choices made at `vertex` by paths started there, pooled over all paths"""
    star = spec.decomposition[vertex]
    job = MonteCarloJob(spec=spec, start=GraphPoint(vertex=vertex), functional=RayCounts(len(star.rays)),
                        horizon=horizon, step=step, seed=seed, record_selections=True, max_crossovers=1)
    accumulator = run_job(job, n_paths, workers, batch_size).accumulator
    counts = np.rint(accumulator.mean * accumulator.n)
    expected = np.array(spec.regimes[vertex].probabilities) if spec.regimes[vertex].probabilities else np.zeros(len(star.rays))
    return RayFrequencies(vertex=vertex, counts=counts, expected=expected)
