#!/usr/bin/env python3
"""
Vertex Regime Classifier
Maps the Wentzell weights at a vertex to the behaviour of the single-vertex Brownian motion
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from graph_core.metric_graph import MetricGraph, Port
from wentzell.wentzell_data import WentzellData


class RegimeKind(Enum):
    TRAP = "trap"
    HOLD_KILL = "hold_kill"
    STICKY = "sticky"


@dataclass(frozen=True)
class VertexRegime:
    """
    Simulation parameters for one vertex.

    TRAP:      absorbed at the vertex forever (a = 0, B = 0, c = 1)
    HOLD_KILL: held for an Exp(a/c) time, then sent to the cemetery (B = 0, a > 0)
    STICKY:    Walsh excursions with ray probabilities b_l / B, real time delayed by
               rho = c / B per unit local time and killed at rate gamma = a / B per unit local time
    """
    kind: RegimeKind
    ports: Tuple[Port, ...] = ()
    probabilities: Tuple[float, ...] = ()
    sticky_delay: float = 0.0
    kill_rate: float = 0.0
    hold_rate: float = 0.0

    @property
    def mean_hold(self) -> float:
        return 1.0 / self.hold_rate if self.hold_rate > 0 else float("inf")

    @property
    def cumulative_probabilities(self) -> np.ndarray:
        cumulative = np.cumsum(self.probabilities)
        if cumulative.size:
            cumulative[-1] = 1.0
        return cumulative

    def describe(self) -> str:
        if self.kind is RegimeKind.TRAP:
            return "trap"
        if self.kind is RegimeKind.HOLD_KILL:
            return f"hold-kill (rate {self.hold_rate:.6g})"
        weights = ", ".join(f"{p}={q:.4g}" for p, q in zip(self.ports, self.probabilities))
        return f"sticky-walsh ({weights}; rho={self.sticky_delay:.4g}, gamma={self.kill_rate:.4g})"


def classify(data: WentzellData, vertex: str, g: MetricGraph = None) -> VertexRegime:
    """Classify the vertex. `g` fixes the port order; otherwise the data's own order is used."""
    d = data[vertex]
    ports = tuple(g.ports(vertex)) if g is not None else tuple(d.b.keys())
    weights = np.array([d.b.get(port, 0.0) for port in ports], dtype=float)
    total_b = float(weights.sum())

    if total_b <= 0.0:
        if d.a <= 0.0:
            return VertexRegime(kind=RegimeKind.TRAP, ports=ports)
        return VertexRegime(kind=RegimeKind.HOLD_KILL, ports=ports, hold_rate=d.a / d.c)

    return VertexRegime(
        kind=RegimeKind.STICKY,
        ports=ports,
        probabilities=tuple(float(w) for w in weights / total_b),
        sticky_delay=d.c / total_b,
        kill_rate=d.a / total_b,
    )


def classify_all(g: MetricGraph, data: WentzellData) -> Dict[str, VertexRegime]:
    return {v: classify(data, v, g) for v in g.vertices}
