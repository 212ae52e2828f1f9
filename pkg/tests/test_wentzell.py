#!/usr/bin/env python3
"""
Tests for Wentzell boundary data and vertex regime classification
"""

import math
import os
import sys

import pytest

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from graph_core.metric_graph import Port
from graph_core.graph_parser import parse_graph
from wentzell.regime_classifier import RegimeKind, classify, classify_all
from wentzell.wentzell_data import VertexData, WentzellData, WentzellViolationError, validate
from tests.test_data import TRAP_DOC


@pytest.mark.unit
class TestWentzellData:
    """Test construction, validation and transformations of the vertex weights"""

    def test_from_raw_normalizes_small_drift(self, half_line):
        g, _ = half_line
        data = WentzellData.from_raw(g, {"v": 0.0}, {"v": {Port("e"): 1.0 + 1e-10}}, {"v": 0.0})
        assert data["v"].total == 1.0

    def test_from_raw_without_normalizing(self, half_line):
        g, _ = half_line
        data = WentzellData.from_raw(g, {}, {"v": {Port("e"): 1.0 + 1e-10}}, {}, normalize=False)
        assert data["v"].total == 1.0 + 1e-10

    def test_from_raw_reports_every_violation(self, interval):
        g, _ = interval
        with pytest.raises(WentzellViolationError) as excinfo:
            WentzellData.from_raw(g, {"v1": 1.0, "v2": 0.0}, {"v2": {Port("i1", "+"): 0.5}}, {})
        violations = excinfo.value.violations
        assert any("a_v must be < 1" in v for v in violations)
        assert any(v.startswith("vertex v2: a + sum(b) + c") for v in violations)

    def test_validate_messages(self, interval):
        g, _ = interval
        data = WentzellData({
            "v1": VertexData(a=-0.1, b={Port("i1", "-"): 1.1}, c=0.0),
            "v2": VertexData(a=0.0, b={Port("x", "-"): 1.0}, c=0.0),
            "ghost": VertexData(a=0.0, b={}, c=1.0),
        })
        violations = validate(data, g)
        assert "vertex v1: a_v = -0.1 is negative" in violations
        assert any("outside [0, 1]" in v for v in violations)
        assert "vertex v2: b entry for non-incident edge x" in violations
        assert "vertex ghost: data for undeclared vertex" in violations

    def test_missing_vertex(self, interval):
        g, data = interval
        assert validate(data.restricted(["v1"]), g) == ["vertex v2: no Wentzell data"]

    def test_scaled_and_normalized(self, two_vertex):
        _, data = two_vertex
        doubled = data.scaled(2.0, "v1")
        assert doubled["v1"].total == pytest.approx(2.0)
        assert doubled["v2"].total == pytest.approx(1.0)
        assert doubled.normalized()["v1"].a == pytest.approx(0.1)

    def test_with_vertex_and_killing_free(self, two_vertex):
        _, data = two_vertex
        assert not data.killing_free()
        reflecting = data.with_vertex("v1", VertexData(a=0.0, b=dict(data["v1"].b), c=0.2))
        assert reflecting.killing_free()
        assert data["v1"].a == pytest.approx(0.1)


@pytest.mark.unit
class TestRegimeClassifier:
    """Test the mapping from vertex weights to sampling regimes"""

    def test_trap(self):
        g, data = parse_graph(TRAP_DOC)
        regime = classify(data, "v", g)
        assert regime.kind is RegimeKind.TRAP
        assert regime.describe() == "trap"

    def test_hold_kill(self, hold_kill):
        g, data = hold_kill
        regime = classify(data, "v", g)
        assert regime.kind is RegimeKind.HOLD_KILL
        assert regime.hold_rate == pytest.approx(0.25)
        assert regime.mean_hold == pytest.approx(4.0)

    def test_sticky_parameters(self, two_vertex):
        g, data = two_vertex
        regime = classify(data, "v1", g)
        assert regime.kind is RegimeKind.STICKY
        assert regime.ports == (Port("i1", "-"), Port("e1", "-"))
        assert regime.probabilities == pytest.approx((0.5, 0.5))
        assert regime.sticky_delay == pytest.approx(0.125)
        assert regime.kill_rate == pytest.approx(0.125)

    def test_pure_walsh(self, walsh_star):
        g, data = walsh_star
        regime = classify(data, "v", g)
        assert regime.probabilities == pytest.approx((0.5, 0.3, 0.2))
        assert regime.sticky_delay == 0.0
        assert regime.kill_rate == 0.0
        assert math.isinf(regime.mean_hold)
        assert regime.cumulative_probabilities[-1] == 1.0

    def test_classify_all_covers_every_vertex(self, two_vertex):
        g, data = two_vertex
        regimes = classify_all(g, data)
        assert set(regimes) == {"v1", "v2"}
        assert regimes["v2"].sticky_delay == pytest.approx(0.25)
        assert "rho=0.25" in regimes["v2"].describe()
