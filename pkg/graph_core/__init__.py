"""
Graph Core Package - Metric graphs, parsing, joining, star decomposition and tadpole expansion
"""

from .metric_graph import ExternalEdge, GraphPoint, GraphValidationError, InternalEdge, MetricGraph, Port
from .graph_parser import GraphFormatError, format_graph, load_graph, parse_graph
from .graph_joiner import JoinError, JoinPair, JoinPlan, JoinResult, join_graphs
from .star_decomposer import Ray, Star, StarDecomposition, decompose_to_stars, reassemble_stars
from .tadpole_expander import TadpoleExpansion, expand_tadpoles

__all__ = [
    'ExternalEdge', 'GraphPoint', 'GraphValidationError', 'InternalEdge', 'MetricGraph', 'Port',
    'GraphFormatError', 'format_graph', 'load_graph', 'parse_graph',
    'JoinError', 'JoinPair', 'JoinPlan', 'JoinResult', 'join_graphs',
    'Ray', 'Star', 'StarDecomposition', 'decompose_to_stars', 'reassemble_stars',
    'TadpoleExpansion', 'expand_tadpoles',
]
