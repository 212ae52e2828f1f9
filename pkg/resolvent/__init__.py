"""
Resolvent Package - Dirichlet kernels, graph functions and the semi-analytic resolvent solve
"""

from .kernels import dirichlet_kernel, edge_hitting_weights, hitting_lt
from .graph_functions import GraphFunction, parse_function
from .resolvent_solver import ResolventSolution, SingularSystemError, check_domain, solve_resolvent

__all__ = ['dirichlet_kernel', 'edge_hitting_weights', 'hitting_lt', 'GraphFunction', 'parse_function',
           'ResolventSolution', 'SingularSystemError', 'check_domain', 'solve_resolvent']
