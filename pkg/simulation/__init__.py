"""
Simulation Package - Star samplers, the paste engine and path diagnostics
"""

from .edge_sampler import EdgeSegment, SamplerError, sample_edge_segment
from .star_sampler import SvPathRecord, sample_sv_path
from .paste_engine import (
    CrossoverRecord, GlobalPathRecord, PastedProcessSpec, build_process, sample_path
)
from .crossover_checker import CrossoverDiagnostics, check_crossover

__all__ = ['EdgeSegment', 'SamplerError', 'sample_edge_segment', 'SvPathRecord', 'sample_sv_path',
           'CrossoverRecord', 'GlobalPathRecord', 'PastedProcessSpec', 'build_process', 'sample_path',
           'CrossoverDiagnostics', 'check_crossover']
