"""
Utils package for the metric graph simulator
Contains the environment configuration and the run logger
"""

from .config import SimulationConfig
from .run_logger import RunLogger

__all__ = [
    'SimulationConfig',
    'RunLogger'
]
