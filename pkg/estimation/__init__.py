"""
Estimation Package - Monte-Carlo estimators, the crossover chain kernel and oracle comparison
"""

from .accumulators import Estimate, MomentAccumulator
from .estimators import (
    HorizonTruncationWarning, collect_lifetimes, estimate_first_passage_lt, estimate_hitting_lt,
    estimate_lifetime, estimate_ray_frequencies, estimate_resolvent
)
from .chain_kernel import EmpiricalChainKernel, chain_kernel, ck_test
from .comparison import ComparisonRow, bonferroni_threshold, compare

__all__ = ['Estimate', 'MomentAccumulator', 'HorizonTruncationWarning', 'collect_lifetimes',
           'estimate_first_passage_lt', 'estimate_hitting_lt', 'estimate_lifetime',
           'estimate_ray_frequencies', 'estimate_resolvent', 'EmpiricalChainKernel', 'chain_kernel',
           'ck_test', 'ComparisonRow', 'bonferroni_threshold', 'compare']
