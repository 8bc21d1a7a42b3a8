"""Latency model, satisfaction indicator and satisfaction ratio.

Latency is the closed-form proxy: data size times delivery distance for
the up/down transfers, plus ``C * fraction * r_p / capacity`` for compute.
Storage latency is upload + download.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .demand import DemandSet, SlotDemand
from .model import Allocation, InputError, Scenario


class SingularityError(ArithmeticError):
    """Compute fraction assigned to a node with zero compute capacity."""


@dataclass(frozen=True)
class LatencyBreakdown:
    cloud_compute: float
    edge_compute: float
    cloud_up: float
    cloud_down: float
    edge_up: float
    edge_down: float

    @property
    def total(self) -> float:
        return (self.cloud_up + self.cloud_down + self.cloud_compute) + (self.edge_up + self.edge_down + self.edge_compute)


def _slot_demand(demand, slot: int) -> SlotDemand:
    return demand.slot(slot) if isinstance(demand, DemandSet) else demand


def _inverse_capacity(caps: np.ndarray, fractions: np.ndarray, what: str) -> np.ndarray:
    inv = np.zeros_like(caps, dtype=float)
    positive = caps > 0
    inv[positive] = 1.0 / caps[positive]
    if np.any(fractions[..., ~positive] > 0):
        raise SingularityError(f"nonzero compute fraction on a {what} node with zero compute capacity")
    return inv


def latency_breakdown(allocation: Allocation, demand, scenario: Scenario, area: int, service: int) -> LatencyBreakdown:
    """Latency components of one (area, service) pair in the allocation's slot."""
    d = _slot_demand(demand, allocation.slot)
    s, s_post, c = d.s[area, service], d.s_post[area, service], d.c[area, service]
    r_p = scenario.services[service].r_p
    h_e = scenario.edge_distances[area]
    h_a = scenario.cloud_distances[area]
    alpha, beta = allocation.alpha[area, service], allocation.beta[area, service]
    th_s, th_c = allocation.theta_s[area, service], allocation.theta_c[area, service]

    c_edge = np.array([e.compute_capacity for e in scenario.edge_nodes], dtype=float)
    c_cloud = np.array([a.compute_capacity for a in scenario.cloud_nodes], dtype=float)
    inv_e = _inverse_capacity(c_edge, beta if c else np.zeros_like(beta), "edge")
    inv_a = _inverse_capacity(c_cloud, th_c if c else np.zeros_like(th_c), "cloud")
    return LatencyBreakdown(
        cloud_compute=float(c * r_p * (th_c * inv_a).sum()),
        edge_compute=float(c * r_p * (beta * inv_e).sum()),
        cloud_up=float(s * (th_s * h_a).sum()),
        cloud_down=float(s_post * (th_s * h_a).sum()),
        edge_up=float(s * (alpha * h_e).sum()),
        edge_down=float(s_post * (alpha * h_e).sum()),
    )


def latency_matrix(allocation: Allocation, demand, scenario: Scenario) -> np.ndarray:
    """Total latency ``l_{u,p}(t)`` for every pair, as an [area, service] array."""
    d = _slot_demand(demand, allocation.slot)
    r_p = np.array([s.r_p for s in scenario.services], dtype=float)
    c_edge = np.array([e.compute_capacity for e in scenario.edge_nodes], dtype=float)
    c_cloud = np.array([a.compute_capacity for a in scenario.cloud_nodes], dtype=float)
    active = d.c[:, :, None] > 0
    inv_e = _inverse_capacity(c_edge, np.where(active, allocation.beta, 0.0), "edge")
    inv_a = _inverse_capacity(c_cloud, np.where(active, allocation.theta_c, 0.0), "cloud")
    size = d.s + d.s_post
    storage = size * ((allocation.alpha * scenario.edge_distances[:, None, :]).sum(axis=2)
                      + (allocation.theta_s * scenario.cloud_distances[:, None, :]).sum(axis=2))
    compute = d.c * r_p[None, :] * ((allocation.beta * inv_e).sum(axis=2) + (allocation.theta_c * inv_a).sum(axis=2))
    return storage + compute


def satisfaction_indicator(breakdown, service) -> int:
    """m_{u,p}(t): 1 when the total latency is within ``l_p`` (inclusive)."""
    total = breakdown.total if isinstance(breakdown, LatencyBreakdown) else float(breakdown)
    limit = service.latency_requirement if hasattr(service, "latency_requirement") else float(service)
    return 1 if total <= limit else 0


def satisfaction_ratio(allocations: Sequence[Allocation], demand: DemandSet, scenario: Scenario, service) -> float:
    """Demand-weighted share of satisfied (area, slot) demands for one service.

    ``allocations`` holds one allocation per slot; ``None`` entries (unsolved
    slots) count as unsatisfied. Zero total demand gives 1.
    """
    p = service if isinstance(service, int) else scenario.service_index(getattr(service, "id", service))
    limit = scenario.services[p].latency_requirement
    if len(allocations) != demand.slot_count:
        raise InputError(f"schedule has {len(allocations)} slots, demand has {demand.slot_count}")
    satisfied = 0.0
    total = 0.0
    for t, alloc in enumerate(allocations):
        s = demand.s[:, p, t]
        total += float(s.sum())
        if alloc is None:
            continue
        lat = latency_matrix(alloc, demand, scenario)[:, p]
        satisfied += float(s[lat <= limit].sum())
    if total == 0:
        return 1.0
    return satisfied / total
