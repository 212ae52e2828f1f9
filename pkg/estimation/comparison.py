#!/usr/bin/env python3
"""
Oracle Comparison
Pass/fail comparison of Monte-Carlo estimates with reference values, the Bonferroni per-row
threshold and the quarter-step bias check
"""

from dataclasses import asdict, dataclass
from typing import Dict

from scipy.stats import norm

from estimation.accumulators import Estimate


REPORT_COLUMNS = ["experiment_id", "quantity", "reference", "mean", "stderr", "z",
                  "n_paths", "h", "seed", "pass"]

# two-sided 3-sigma level
FAMILY_ALPHA = 0.0027


@dataclass
class ComparisonRow:
    experiment_id: str
    quantity: str
    reference: float
    mean: float
    stderr: float
    z: float
    n_paths: int
    h: float
    seed: int
    passed: bool
    tolerance: float = 0.0

    def as_row(self) -> Dict:
        row = asdict(self)
        row["pass"] = row.pop("passed")
        row.pop("tolerance")
        return {column: row[column] for column in REPORT_COLUMNS}


def compare(reference: float, estimate: Estimate, sigma: float = 3.0, bias_constant: float = 0.0,
            experiment_id: str = "", quantity: str = "", floor: float = 0.0) -> ComparisonRow:
    """Pass iff |mean - reference| <= max(sigma * stderr, 2 * C * h, floor)"""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    tolerance = max(sigma * estimate.stderr, 2.0 * bias_constant * estimate.step, floor)
    passed = abs(estimate.mean - reference) <= tolerance
    return ComparisonRow(experiment_id=experiment_id, quantity=quantity or estimate.label,
                         reference=float(reference), mean=estimate.mean, stderr=estimate.stderr,
                         z=estimate.z(reference), n_paths=estimate.n, h=estimate.step, seed=estimate.seed,
                         passed=bool(passed), tolerance=tolerance)


def exact_row(experiment_id: str, quantity: str, reference: float, value: float,
              tolerance: float) -> ComparisonRow:
    """Row for a deterministic check (no sampling)"""
    return ComparisonRow(experiment_id=experiment_id, quantity=quantity, reference=float(reference),
                         mean=float(value), stderr=0.0, z=0.0 if value == reference else float("nan"),
                         n_paths=0, h=0.0, seed=0, passed=bool(abs(value - reference) <= tolerance),
                         tolerance=tolerance)


def bonferroni_threshold(comparisons: int, alpha: float = FAMILY_ALPHA) -> float:
    """Per-row z threshold keeping the family-wise two-sided level at alpha"""
    return float(norm.ppf(1.0 - alpha / (2.0 * max(comparisons, 1))))


@dataclass
class QuarterStepCheck:
    bias_coarse: float
    bias_fine: float
    stderr_difference: float

    @property
    def passed(self) -> bool:
        """|bias(h/4)| <= max(|bias(h)|/2, 3 * stderr of the difference)"""
        return abs(self.bias_fine) <= max(abs(self.bias_coarse) / 2.0, 3.0 * self.stderr_difference)


def quarter_step_check(reference: float, coarse: Estimate, fine: Estimate) -> QuarterStepCheck:
    return QuarterStepCheck(bias_coarse=coarse.mean - reference, bias_fine=fine.mean - reference,
                            stderr_difference=(coarse.stderr ** 2 + fine.stderr ** 2) ** 0.5)
