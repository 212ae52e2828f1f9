"""
Pytest configuration and fixtures for the metric graph simulator tests
"""
import json
import os
import shutil
import sys
import tempfile

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from graph_core.graph_parser import parse_graph
from simulation.paste_engine import build_process
from tests.test_data import (
    HALF_LINE_DOC, HOLD_KILL_DOC, INTERVAL_DOC, TADPOLE_DOC, TWO_VERTEX_DOC, WALSH_STAR_DOC
)

# Test fixtures

@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def interval():
    """Unit interval with reflecting ends: (graph, data)"""
    return parse_graph(INTERVAL_DOC)


@pytest.fixture
def half_line():
    return parse_graph(HALF_LINE_DOC)


@pytest.fixture
def walsh_star():
    return parse_graph(WALSH_STAR_DOC)


@pytest.fixture
def hold_kill():
    return parse_graph(HOLD_KILL_DOC)


@pytest.fixture
def two_vertex():
    return parse_graph(TWO_VERTEX_DOC)


@pytest.fixture
def tadpole():
    return parse_graph(TADPOLE_DOC)


@pytest.fixture
def interval_spec(interval):
    return build_process(*interval)


@pytest.fixture
def half_line_spec(half_line):
    return build_process(*half_line)


@pytest.fixture
def walsh_spec(walsh_star):
    return build_process(*walsh_star)


@pytest.fixture
def hold_kill_spec(hold_kill):
    return build_process(*hold_kill)


@pytest.fixture
def two_vertex_spec(two_vertex):
    return build_process(*two_vertex)


@pytest.fixture
def graph_file(temp_dir):
    """Write a graph document to a file and return its path"""
    def write(text, name="graph.g"):
        path = os.path.join(temp_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path
    return write


@pytest.fixture
def small_settings(temp_dir):
    """Settings file with small sample counts for quick verification runs"""
    settings = {
        "verification": {
            "paths": 200,
            "step": 1e-3,
            "horizon": 40.0,
            "kernel_property_samples": 50,
            "tadpole_grid_points": 8,
            "identity_grid_points": 4,
            "crossover_check_paths": 20
        }
    }
    path = os.path.join(temp_dir, "settings.json")
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(settings, f)
    return path


@pytest.fixture
def config_manager(small_settings):
    from verification.settings.config_manager import ConfigManager
    return ConfigManager(small_settings)

