#!/usr/bin/env python3
"""
Crossover Chain Kernel
Empirical one-step kernel of the crossover chain (S_n, K_n) and a Chapman-Kolmogorov test of the
two-step Laplace functional against the composition of one-step kernels
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from estimation.parallel_runner import DEFAULT_BATCH_SIZE, MonteCarloJob, run_job
from estimation.path_functionals import ChainTransform, FirstCrossover
from graph_core.metric_graph import GraphPoint
from simulation.paste_engine import CEMETERY, PastedProcessSpec
from simulation.rng_streams import experiment_seed


@dataclass
class EmpiricalChainKernel:
    """Samples of (S_1, K_1) from a start vertex; K_1 = Δ when no crossover happened in the horizon"""
    vertex: str
    targets: List[str]
    first_times: np.ndarray
    first_vertices: np.ndarray
    lam_grid: List[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.first_times)

    def histogram(self) -> Dict[str, int]:
        counts = {w: int((self.first_vertices == i).sum()) for i, w in enumerate(self.targets)}
        counts[CEMETERY] = int((self.first_vertices < 0).sum())
        return counts

    def mass(self) -> float:
        return sum(self.histogram().values()) / max(self.n, 1)

    def laplace(self, lam: float) -> Dict[str, float]:
        """w -> mean of exp(-lam S_1) 1{K_1 = w}"""
        result = {}
        finite = np.isfinite(self.first_times)
        for i, w in enumerate(self.targets):
            hit = finite & (self.first_vertices == i)
            result[w] = float(np.exp(-lam * self.first_times[hit]).sum() / max(self.n, 1))
        return result

    def laplace_table(self) -> List[Dict]:
        return [{"lambda": lam, "K_1": w, "value": value}
                for lam in self.lam_grid for w, value in self.laplace(lam).items()]


def chain_kernel(spec: PastedProcessSpec, vertex: str, lam_grid: Sequence[float], n_paths: int,
                 horizon: float, step: float, seed: int, workers: int = 1,
                 batch_size: int = DEFAULT_BATCH_SIZE) -> EmpiricalChainKernel:
    """Sample the first crossover from `vertex`"""
    connected = list(spec.connected_vertices)
    if vertex not in connected:
        raise ValueError(f"{vertex} is not a connected vertex (V_c = {', '.join(connected)})")
    job = MonteCarloJob(spec=spec, start=GraphPoint(vertex=vertex), functional=FirstCrossover(connected),
                        horizon=horizon, step=step, seed=seed, max_crossovers=1, collect=True)
    values = run_job(job, n_paths, workers, batch_size).values
    first_times = np.where(values[:, 0] < 0, math.inf, values[:, 0])
    return EmpiricalChainKernel(vertex=vertex, targets=connected, first_times=first_times,
                                first_vertices=values[:, 1].astype(int), lam_grid=[float(x) for x in lam_grid])


@dataclass
class ChainTestRow:
    lam: float
    target: str
    two_step: float
    composed: float
    stderr: float

    @property
    def z(self) -> float:
        if self.stderr > 0:
            return (self.two_step - self.composed) / self.stderr
        return 0.0 if self.two_step == self.composed else math.copysign(1e12, self.two_step - self.composed)


@dataclass
class ChainTestReport:
    vertex: str
    rows: List[ChainTestRow]
    missing_second: float
    threshold: float = 3.0

    @property
    def max_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_abs_z <= self.threshold

    @property
    def insufficient(self) -> bool:
        """More than half of the two-step paths saw no second crossover"""
        return self.missing_second > 0.5


def _transform(spec, start_vertex, targets, lam_grid, order, n_paths, horizon, step, seed, workers, batch_size):
    job = MonteCarloJob(spec=spec, start=GraphPoint(vertex=start_vertex),
                        functional=ChainTransform(targets, lam_grid, order), horizon=horizon,
                        step=step, seed=seed, max_crossovers=order)
    accumulator = run_job(job, n_paths, workers, batch_size).accumulator
    shape = (len(lam_grid), len(targets))
    mean = accumulator.mean[:-1].reshape(shape)
    covariance = accumulator.covariance[:-1, :-1] / accumulator.n
    return mean, covariance, 1.0 - float(accumulator.mean[-1])


def ck_test(spec: PastedProcessSpec, vertex: str, lam_grid: Sequence[float], n_paths: int,
            horizon: float, step: float, seed: int, workers: int = 1,
            batch_size: int = DEFAULT_BATCH_SIZE, two_step_spec: Optional[PastedProcessSpec] = None,
            threshold: float = 3.0) -> ChainTestReport:
    """
    Compare E_v[exp(-lam S_2) 1{K_2 = g}] with sum_w E_v[exp(-lam S_1) 1{K_1 = w}] E_w[exp(-lam S_1) 1{K_1 = g}]
    for every connected g and lam in the grid. All expectations come from independent runs;
    the composed side's variance is propagated with the delta method. `two_step_spec` swaps
    in another process for the two-step run (sensitivity control).
    """
    targets = list(spec.connected_vertices)
    if vertex not in targets:
        raise ValueError(f"{vertex} is not a connected vertex (V_c = {', '.join(targets)})")
    lam_grid = [float(x) for x in lam_grid]
    W = len(targets)

    two_spec = two_step_spec or spec
    two, two_cov, missing = _transform(two_spec, vertex, targets, lam_grid, 2, n_paths, horizon, step,
                                       experiment_seed(seed, 1), workers, batch_size)
    one, one_cov, _ = _transform(spec, vertex, targets, lam_grid, 1, n_paths, horizon, step,
                                 experiment_seed(seed, 2), workers, batch_size)
    onward = []
    for index, w in enumerate(targets):
        mean, cov, _ = _transform(spec, w, targets, lam_grid, 1, n_paths, horizon, step,
                                  experiment_seed(seed, 3 + index), workers, batch_size)
        onward.append((mean, cov))

    # lambda-major flattening, matching ChainTransform
    def flat(l, j):
        return l * W + j

    rows = []
    for l, lam in enumerate(lam_grid):
        a = one[l]
        a_cov = np.array([[one_cov[flat(l, i), flat(l, j)] for j in range(W)] for i in range(W)])
        for g_index, g in enumerate(targets):
            b = np.array([onward[w][0][l, g_index] for w in range(W)])
            b_var = np.array([onward[w][1][flat(l, g_index), flat(l, g_index)] for w in range(W)])
            composed = float(a @ b)
            variance = float(b @ a_cov @ b + (a ** 2) @ b_var + np.diag(a_cov) @ b_var)
            variance += float(two_cov[flat(l, g_index), flat(l, g_index)])
            rows.append(ChainTestRow(lam=lam, target=g, two_step=float(two[l, g_index]), composed=composed,
                                     stderr=math.sqrt(max(variance, 0.0))))

    return ChainTestReport(vertex=vertex, rows=rows, missing_second=missing, threshold=threshold)

