#!/usr/bin/env python3
"""
Resolvent Kernels
Dirichlet resolvent kernels of Brownian motion on a single edge, hitting Laplace transforms and
the boundary-flux kernels of the Dirichlet resolvent
"""

import math
from typing import Dict, Tuple

import numpy as np

from graph_core.metric_graph import GraphPoint, MetricGraph


# Image series tail target
TAIL_TOLERANCE = 1e-12


def rate(lam: float) -> float:
    """k = sqrt(2 lambda)"""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return math.sqrt(2.0 * lam)


def image_terms(length: float, lam: float, tail: float = TAIL_TOLERANCE) -> int:
    """K such that the images |n| > K contribute less than `tail`"""
    k = rate(lam)
    return int(math.ceil(-math.log10(tail) / (k * 2.0 * length) * math.log(10.0)))


def dirichlet_kernel(length: float, lam: float, x, y, terms: int = None):
    """
    Resolvent density r^D(x, y) of Brownian motion killed at the ends of an edge. External edges
    (length inf) use the single image; internal edges the truncated image series. Zero whenever x
    or y is at an endpoint.
    """
    k = rate(lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    if math.isinf(length):
        value = (np.exp(-k * np.abs(x - y)) - np.exp(-k * (x + y))) / k
        inside = (x > 0) & (y > 0)
    else:
        K = image_terms(length, lam) if terms is None else terms
        shifts = 2.0 * length * np.arange(-K, K + 1)
        shape = np.broadcast(x, y).shape
        xs = np.broadcast_to(x, shape)[..., None]
        ys = np.broadcast_to(y, shape)[..., None]
        value = (np.exp(-k * np.abs(xs - ys + shifts)) - np.exp(-k * np.abs(xs + ys + shifts))).sum(axis=-1) / k
        inside = (x > 0) & (x < length) & (y > 0) & (y < length)

    result = np.where(inside, value, 0.0)
    return float(result) if result.ndim == 0 else result


def dirichlet_kernel_closed(length: float, lam: float, x, y):
    """Closed form of the internal-edge kernel, 2 sinh(k min) sinh(k(a - max)) / (k sinh(ka)), in
    decaying exponentials"""
    if math.isinf(length):
        return dirichlet_kernel(length, lam, x, y)
    k = rate(lam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gap = np.abs(x - y)
    value = (np.exp(-k * gap) - np.exp(-k * (x + y)) - np.exp(-k * (2 * length - x - y))
             + np.exp(-k * (2 * length - gap))) / (-k * math.expm1(-2.0 * k * length))
    inside = (x > 0) & (x < length) & (y > 0) & (y < length)
    result = np.where(inside, value, 0.0)
    return float(result) if result.ndim == 0 else result


def edge_hitting_weights(length: float, lam: float, x: float) -> Tuple[float, float]:
    """
    E[exp(-lambda H); first endpoint hit is the start / the far end] from coordinate x. External
    edges return (exp(-kx), 0).
    """
    k = rate(lam)
    if math.isinf(length):
        return math.exp(-k * x), 0.0
    denominator = -math.expm1(-2.0 * k * length)
    toward_start = (math.exp(-k * x) - math.exp(-k * (2 * length - x))) / denominator
    toward_end = (math.exp(-k * (length - x)) - math.exp(-k * (length + x))) / denominator
    return toward_start, toward_end


def hitting_lt(g: MetricGraph, point: GraphPoint, lam: float) -> Dict[str, float]:
    """Laplace transform of the first vertex hit from `point`, split by the vertex hit"""
    rate(lam)
    if point.is_vertex:
        return {point.vertex: 1.0}
    internal = g.internal_by_id.get(point.edge)
    if internal is None:
        vertex = g.external_by_id[point.edge].vertex
        return {vertex: edge_hitting_weights(math.inf, lam, point.x)[0]}
    toward_tail, toward_head = edge_hitting_weights(internal.length, lam, point.x)
    weights = {internal.tail: toward_tail}
    weights[internal.head] = weights.get(internal.head, 0.0) + toward_head
    return weights


def flux_kernel_start(length: float, lam: float, y):
    """Inward derivative at coordinate 0 of r^D(., y): 2 sinh(k(a - y)) / sinh(ka), or 2 exp(-ky)"""
    k = rate(lam)
    y = np.asarray(y, dtype=float)
    if math.isinf(length):
        return 2.0 * np.exp(-k * y)
    return 2.0 * (np.exp(-k * y) - np.exp(-k * (2 * length - y))) / (-math.expm1(-2.0 * k * length))


def flux_kernel_end(length: float, lam: float, y):
    """Inward derivative at coordinate a of r^D(., y): 2 sinh(ky) / sinh(ka)"""
    k = rate(lam)
    y = np.asarray(y, dtype=float)
    return 2.0 * (np.exp(-k * (length - y)) - np.exp(-k * (length + y))) / (-math.expm1(-2.0 * k * length))
