#!/usr/bin/env python3
"""
Moment Accumulators
Mergeable running mean and co-moment matrix (Welford updates, Chan merges) and the Estimate
they produce
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


# z reported when the standard error is zero and the mean misses the reference
EXACT_MISS_Z = 1e12


@dataclass(frozen=True)
class Estimate:
    """Monte-Carlo mean with its standard error"""
    mean: float
    stderr: float
    n: int
    seed: int
    step: float
    label: str = ""

    def z(self, reference: float) -> float:
        difference = self.mean - reference
        if self.stderr > 0:
            return difference / self.stderr
        if difference == 0:
            return 0.0
        return math.copysign(EXACT_MISS_Z, difference)

    def __str__(self) -> str:
        return f"{self.mean:.6f} ± {self.stderr:.6f} (n={self.n})"


class MomentAccumulator:
    """Running mean and co-moment matrix of fixed-width vectors"""

    def __init__(self, width: int = 1):
        self.width = width
        self.n = 0
        self.mean = np.zeros(width)
        self.comoment = np.zeros((width, width))

    def add(self, value) -> None:
        """Welford update with one observation"""
        value = np.asarray(value, dtype=float).reshape(self.width)
        self.n += 1
        delta = value - self.mean
        self.mean = self.mean + delta / self.n
        self.comoment = self.comoment + np.outer(delta, value - self.mean)

    def add_many(self, values) -> None:
        for value in np.asarray(values, dtype=float).reshape(-1, self.width):
            self.add(value)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Chan et al. pairwise combination; returns a new accumulator"""
        if other.width != self.width:
            raise ValueError(f"cannot merge widths {self.width} and {other.width}")
        merged = MomentAccumulator(self.width)
        merged.n = self.n + other.n
        if merged.n == 0:
            return merged
        delta = other.mean - self.mean
        merged.mean = self.mean + delta * (other.n / merged.n)
        merged.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.n * other.n / merged.n)
        return merged

    @property
    def variance(self) -> np.ndarray:
        """Sample variances (n - 1 denominator)"""
        if self.n < 2:
            return np.full(self.width, np.nan)
        return np.diag(self.comoment) / (self.n - 1)

    @property
    def covariance(self) -> np.ndarray:
        if self.n < 2:
            return np.full((self.width, self.width), np.nan)
        return self.comoment / (self.n - 1)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.variance, 0.0) / max(self.n, 1))

    def estimate(self, index: int = 0, seed: int = 0, step: float = 0.0, label: str = "") -> Estimate:
        if self.n < 2:
            raise ValueError(f"need at least 2 samples for an estimate, got {self.n}")
        return Estimate(mean=float(self.mean[index]), stderr=float(self.stderr[index]), n=self.n,
                        seed=seed, step=step, label=label)

    def estimates(self, seed: int = 0, step: float = 0.0, labels: Optional[list] = None):
        labels = labels or [str(i) for i in range(self.width)]
        return [self.estimate(i, seed, step, labels[i]) for i in range(self.width)]
