"""Independent feasibility check of a provisioning plan.

The audit recomputes every constraint family from the fraction tensors and
the scenario, without looking at the LP matrix, so it also catches
assembly mistakes.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..demand import DemandSet, SlotDemand
from ..latency import latency_matrix
from ..model import Allocation, Scenario
from .problem import LinearProgram, LpSolution

FAMILIES = ("bounds", "cloud_capacity", "edge_capacity", "conservation", "latency")


def allocation_from_solution(lp: LinearProgram, solution: LpSolution, slot: int) -> Allocation:
    idx = lp.index
    if idx is None:
        raise ValueError("LP carries no variable index")
    return Allocation(slot, *(idx.tensor(solution.x, k, slot) for k in ("alpha", "beta", "theta_s", "theta_c")))


def audit_allocation(allocation: Allocation, scenario: Scenario, demand,
                     latency_limits: Optional[np.ndarray] = None) -> dict[str, float]:
    """Largest violation of each constraint family (0 when satisfied)."""
    d: SlotDemand = demand.slot(allocation.slot) if isinstance(demand, DemandSet) else demand
    a = allocation
    tensors = (a.alpha, a.beta, a.theta_s, a.theta_c)
    bounds = max((max(float(np.max(-t, initial=0.0)), float(np.max(t - 1, initial=0.0))) for t in tensors),
                 default=0.0)

    s_a = np.array([n.storage_capacity for n in scenario.cloud_nodes], dtype=float)
    c_a = np.array([n.compute_capacity for n in scenario.cloud_nodes], dtype=float)
    s_e = np.array([n.storage_capacity for n in scenario.edge_nodes], dtype=float)
    c_e = np.array([n.compute_capacity for n in scenario.edge_nodes], dtype=float)
    cloud = max(float(np.max(np.einsum("up,upa->a", d.s, a.theta_s) - s_a, initial=0.0)),
                float(np.max(np.einsum("up,upa->a", d.c, a.theta_c) - c_a, initial=0.0)))
    edge = max(float(np.max(np.einsum("up,upe->e", d.s, a.alpha) - s_e, initial=0.0)),
               float(np.max(np.einsum("up,upe->e", d.c, a.beta) - c_e, initial=0.0)))

    limits = scenario.latency_requirements() if latency_limits is None else np.asarray(latency_limits, float)
    lat = latency_matrix(a, d, scenario) - limits[None, :]
    return {
        "bounds": bounds,
        "cloud_capacity": max(cloud, 0.0),
        "edge_capacity": max(edge, 0.0),
        "conservation": a.conservation_error(),
        "latency": max(float(np.max(lat, initial=0.0)), 0.0),
    }


def audit_solution(lp: LinearProgram, solution: LpSolution, scenario: Scenario, demand, slot: int) -> dict[str, float]:
    return audit_allocation(allocation_from_solution(lp, solution, slot), scenario, demand)


def worst(report: dict[str, float]) -> float:
    return max(report.values(), default=0.0)
