"""
CLI Package - Command line entry point
"""

from .command_line import EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE, RunConfig, build_parser, run

__all__ = ['EXIT_CHECK_FAILED', 'EXIT_IO', 'EXIT_OK', 'EXIT_USAGE', 'RunConfig', 'build_parser', 'run']
