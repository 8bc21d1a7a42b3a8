"""Operational cost of an allocation, per-EIP average cost and utilization."""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .demand import DemandSet, SlotDemand
from .model import Allocation, InputError, Scenario


@dataclass(frozen=True)
class CostBreakdown:
    cloud_storage: float = 0.0
    cloud_compute: float = 0.0
    cloud_comm: float = 0.0
    edge_storage: float = 0.0
    edge_compute: float = 0.0
    edge_comm: float = 0.0

    @property
    def cloud(self) -> float:
        return self.cloud_storage + self.cloud_compute + self.cloud_comm

    @property
    def edge(self) -> float:
        return self.edge_storage + self.edge_compute + self.edge_comm

    @property
    def total(self) -> float:
        return self.cloud + self.edge

    def __add__(self, other: "CostBreakdown") -> "CostBreakdown":
        return CostBreakdown(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def as_dict(self) -> dict[str, float]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["total"] = self.total
        return out


def _demand(demand, slot: int) -> SlotDemand:
    return demand.slot(slot) if isinstance(demand, DemandSet) else demand


def edge_prices(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (np.array([e.price_storage for e in scenario.edge_nodes], dtype=float),
            np.array([e.price_compute for e in scenario.edge_nodes], dtype=float),
            np.array([e.price_comm for e in scenario.edge_nodes], dtype=float))


def slot_cost(allocation: Allocation, demand, scenario: Scenario,
              edge_mask: Optional[np.ndarray] = None) -> CostBreakdown:
    """Cost of one slot. ``edge_mask`` (bool per edge node) limits the edge terms."""
    d = _demand(demand, allocation.slot)
    pr = scenario.prices
    v_s, v_c, v_m = edge_prices(scenario)
    if edge_mask is not None:
        v_s, v_c, v_m = v_s * edge_mask, v_c * edge_mask, v_m * edge_mask
    size = d.s + d.s_post
    th_s = allocation.theta_s.sum(axis=2)
    th_c = allocation.theta_c.sum(axis=2)
    return CostBreakdown(
        cloud_storage=float((d.s * th_s).sum() * pr.cloud_storage),
        cloud_compute=float((d.c * th_c).sum() * pr.cloud_compute),
        cloud_comm=float((size * th_s).sum() * pr.cloud_comm),
        edge_storage=float(np.einsum("up,upe,e->", d.s, allocation.alpha, v_s)),
        edge_compute=float(np.einsum("up,upe,e->", d.c, allocation.beta, v_c)),
        edge_comm=float(np.einsum("up,upe,e->", size, allocation.alpha, v_m)),
    )


def cost_breakdown(allocations: Iterable[Allocation], demand: DemandSet, scenario: Scenario) -> CostBreakdown:
    """Total cost over the given slots' allocations (``None`` entries are skipped)."""
    total = CostBreakdown()
    for alloc in allocations:
        if alloc is not None:
            total = total + slot_cost(alloc, demand, scenario)
    return total


def eip_edge_mask(scenario: Scenario, eip: str) -> np.ndarray:
    if eip not in scenario.eips:
        raise InputError(f"unknown EIP {eip!r}")
    return np.array([e.owner_eip == eip for e in scenario.edge_nodes])


def average_cost(allocation: Allocation, demand, scenario: Scenario, eip: str, service: int) -> float:
    """Per-area storage + compute cost of one service on the EIP's edge nodes.

    Uses compute demand with the compute price in the second term, and the
    number of user areas as the user count.
    """
    mask = eip_edge_mask(scenario, eip)
    d = _demand(demand, allocation.slot)
    v_s, v_c, _ = edge_prices(scenario)
    storage = (d.s[:, service, None] * allocation.alpha[:, service, :] * (v_s * mask)).sum()
    compute = (d.c[:, service, None] * allocation.beta[:, service, :] * (v_c * mask)).sum()
    return float((storage + compute) / len(scenario.areas))


def eip_costs(allocation: Allocation, demand, scenario: Scenario,
              cloud_owners: Optional[Mapping[str, Sequence[str]]] = None) -> dict[str, float]:
    """Slot cost attributed to each EIP.

    Edge costs go to the node's owner. Cloud costs of a service are split
    evenly over ``cloud_owners[service]`` (default: its multihoming EIPs, else
    all EIPs).
    """
    d = _demand(demand, allocation.slot)
    eips = scenario.eips
    out = {eip: 0.0 for eip in eips}
    for eip in eips:
        out[eip] += slot_cost(allocation, d, scenario, eip_edge_mask(scenario, eip)).edge
    owners = cloud_owners if cloud_owners is not None else scenario.contracts.multihoming
    pr = scenario.prices
    size = d.s + d.s_post
    th_s = allocation.theta_s.sum(axis=2)
    th_c = allocation.theta_c.sum(axis=2)
    per_service = ((d.s * th_s).sum(axis=0) * pr.cloud_storage + (d.c * th_c).sum(axis=0) * pr.cloud_compute
                   + (size * th_s).sum(axis=0) * pr.cloud_comm)
    for p, svc in enumerate(scenario.services):
        payers = [e for e in owners.get(svc.id, ()) if e in out] or list(eips)
        for eip in payers:
            out[eip] += float(per_service[p]) / len(payers)
    return out


@dataclass(frozen=True)
class Utilization:
    edge_storage: float
    edge_compute: float
    cloud_storage: float
    cloud_compute: float
    storage_on_edge: float  # S_E(t)
    compute_on_edge: float  # C_E(t)
    flags: tuple[str, ...] = field(default=())

    @property
    def edge(self) -> float:
        return 0.5 * (self.edge_storage + self.edge_compute)

    @property
    def cloud(self) -> float:
        return 0.5 * (self.cloud_storage + self.cloud_compute)


def _ratio(used: float, capacity: float, label: str, flags: list[str]) -> float:
    if capacity <= 0:
        flags.append(f"zero {label} capacity")
        return 0.0
    return used / capacity


def utilization(allocation: Allocation, demand, scenario: Scenario) -> Utilization:
    """Used / available resource per class; combined class ratio is the storage/compute mean."""
    d = _demand(demand, allocation.slot)
    flags: list[str] = []
    # S_E(t), C_E(t): whatever the cloud does not take.
    s_edge = float((d.s * (1 - allocation.theta_s.sum(axis=2))).sum())
    c_edge = float((d.c * (1 - allocation.theta_c.sum(axis=2))).sum())
    edge_s_used = float(np.einsum("up,upe->", d.s, allocation.alpha))
    edge_c_used = float(np.einsum("up,upe->", d.c, allocation.beta))
    cloud_s_used = float(np.einsum("up,upa->", d.s, allocation.theta_s))
    cloud_c_used = float(np.einsum("up,upa->", d.c, allocation.theta_c))
    return Utilization(
        edge_storage=_ratio(edge_s_used, sum(e.storage_capacity for e in scenario.edge_nodes), "edge storage", flags),
        edge_compute=_ratio(edge_c_used, sum(e.compute_capacity for e in scenario.edge_nodes), "edge compute", flags),
        cloud_storage=_ratio(cloud_s_used, sum(a.storage_capacity for a in scenario.cloud_nodes), "cloud storage", flags),
        cloud_compute=_ratio(cloud_c_used, sum(a.compute_capacity for a in scenario.cloud_nodes), "cloud compute", flags),
        storage_on_edge=s_edge,
        compute_on_edge=c_edge,
        flags=tuple(flags),
    )
