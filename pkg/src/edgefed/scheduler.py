"""Slot-by-slot provisioning loop and the three provisioning models.

Every model plans each slot on predicted demand, then the plan is charged
and audited against the demand that actually arrives:

* federation: one LP over all EIPs' edge nodes plus the cloud;
* fixed contract: one LP whose edge columns for a service are limited to
  the nodes of its single contracted EIP;
* multihoming: each service's demand is split across its contracted EIPs,
  and every EIP solves its own LP (own nodes, a share of the cloud) for the
  part it received.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .cost import CostBreakdown, slot_cost
from .demand import DemandSet, SlotDemand, service_coefficients
from .latency import satisfaction_ratio
from .lp.assemble import SlotOptions, assemble_slot_lp
from .lp.audit import allocation_from_solution, audit_allocation, worst
from .lp.solvers import Solver, make_solver
from .model import Allocation, InputError, Scenario

log = logging.getLogger(__name__)

FEDERATION = "federation"
MULTIHOMING = "multihoming"
FIXED_CONTRACT = "fixed_contract"
MODELS = (FEDERATION, MULTIHOMING, FIXED_CONTRACT)

EQUAL = "equal"
CAPACITY = "capacity"
SPLIT_RULES = (EQUAL, CAPACITY)

AUDIT_TOL = 1e-7


class InfeasibleSlot(RuntimeError):
    def __init__(self, model: str, slot: int, message: str):
        super().__init__(f"{model}: slot {slot} infeasible ({message})")
        self.model, self.slot, self.message = model, slot, message


@dataclass(frozen=True)
class ContractPolicy:
    """Which EIPs may host each service, and how multihomed demand is split."""

    hosts: Mapping[str, tuple[str, ...]]
    split: str = EQUAL

    def __post_init__(self):
        if self.split not in SPLIT_RULES:
            raise InputError(f"unknown split rule {self.split!r}; use one of {SPLIT_RULES}")

    @classmethod
    def for_model(cls, scenario: Scenario, model: str, split: str = EQUAL) -> "ContractPolicy":
        table = scenario.contracts.fixed_contract if model == FIXED_CONTRACT else scenario.contracts.multihoming
        label = "fixed_contract" if model == FIXED_CONTRACT else "multihoming"
        hosts = {}
        for svc in scenario.services:
            eips = tuple(table.get(svc.id, ()))
            if not eips:
                raise InputError(f"{label}: service {svc.id!r} has no contracted EIP")
            if model == FIXED_CONTRACT and len(eips) != 1:
                raise InputError(f"fixed_contract: service {svc.id!r} must have exactly one EIP, got {len(eips)}")
            unknown = set(eips) - set(scenario.eips)
            if unknown:
                raise InputError(f"{label}: service {svc.id!r} names unknown EIP(s) {sorted(unknown)}")
            hosts[svc.id] = eips
        return cls(hosts, split)

    def edge_allowed(self, scenario: Scenario) -> np.ndarray:
        """bool [service, edge]: may the service use the node."""
        return np.array([[e.owner_eip in self.hosts[s.id] for e in scenario.edge_nodes] for s in scenario.services],
                        dtype=bool)

    def shares(self, scenario: Scenario) -> dict[str, np.ndarray]:
        """Fraction of each service's demand handed to each EIP (per service, sums to 1)."""
        eips = [e for e in scenario.eips if any(e in h for h in self.hosts.values())]
        out = {e: np.zeros(len(scenario.services)) for e in eips}
        for p, svc in enumerate(scenario.services):
            hosts = self.hosts[svc.id]
            if self.split == EQUAL:
                weights = np.ones(len(hosts))
            else:
                weights = np.array([sum(n.storage_capacity for n in scenario.edge_nodes if n.owner_eip == h)
                                    for h in hosts], dtype=float)
                if weights.sum() <= 0:
                    weights = np.ones(len(hosts))
            for h, w in zip(hosts, weights / weights.sum()):
                out[h][p] = w
        return out


@dataclass(frozen=True)
class DemandSource:
    """Actual demand over the horizon plus optional observations preceding it."""

    actual: DemandSet
    history: Optional[DemandSet] = None

    @classmethod
    def periodic(cls, demand: DemandSet, periods: int = 1) -> "DemandSource":
        """History made of ``periods`` repetitions of the horizon itself."""
        hist = DemandSet(*(np.concatenate([getattr(demand, k)] * periods, axis=2) for k in ("s", "s_post", "c")))
        return cls(demand, hist if periods else None)

    def observed(self, t: int) -> np.ndarray:
        """Storage demand seen before slot ``t``, shaped [time, area, service]."""
        parts = []
        if self.history is not None:
            parts.append(self.history.s.transpose(2, 0, 1))
        parts.append(self.actual.s[:, :, :t].transpose(2, 0, 1))
        return np.concatenate(parts, axis=0)


@dataclass
class ScheduleTimeline:
    model: str
    allocations: list[Optional[Allocation]]
    planned: list[Optional[CostBreakdown]]
    realized: list[Optional[CostBreakdown]]
    audits: list[Optional[dict]]
    predicted: DemandSet
    actual: DemandSet
    infeasible: dict[int, str] = field(default_factory=dict)
    fallback_slots: tuple[int, ...] = ()
    resolved_slots: tuple[int, ...] = ()

    @property
    def slot_count(self) -> int:
        return len(self.allocations)

    @property
    def feasible(self) -> bool:
        return not self.infeasible

    def slot_costs(self, planned: bool = False) -> np.ndarray:
        seq = self.planned if planned else self.realized
        return np.array([c.total if c is not None else np.nan for c in seq])

    @property
    def total_cost(self) -> float:
        return float(sum(c.total for c in self.realized if c is not None))

    @property
    def planned_total(self) -> float:
        return float(sum(c.total for c in self.planned if c is not None))

    @property
    def breakdown(self) -> CostBreakdown:
        out = CostBreakdown()
        for c in self.realized:
            if c is not None:
                out = out + c
        return out

    def max_violation(self) -> float:
        return max((worst(a) for a in self.audits if a is not None), default=0.0)

    def satisfaction(self, scenario: Scenario) -> dict[str, float]:
        return {s.id: satisfaction_ratio(self.allocations, self.actual, scenario, p)
                for p, s in enumerate(scenario.services)}


def _solve(scenario: Scenario, demand: SlotDemand, slot: int, options: Optional[SlotOptions], solver: Solver):
    lp = assemble_slot_lp(scenario, demand, slot, options)
    sol = solver(lp)
    if not sol.optimal:
        row = lp.row_names[sol.certificate_row] if sol.certificate_row is not None else "n/a"
        return None, f"{sol.status}; first violated row {row}"
    return allocation_from_solution(lp, sol, slot), ""


def plan_slot(model: str, scenario: Scenario, demand: SlotDemand, slot: int, solver: Solver,
              policy: Optional[ContractPolicy] = None) -> tuple[Optional[Allocation], str]:
    """Allocation of one model for one slot, or ``(None, reason)`` when infeasible."""
    if model == FEDERATION:
        return _solve(scenario, demand, slot, None, solver)
    if model == FIXED_CONTRACT:
        policy = policy or ContractPolicy.for_model(scenario, FIXED_CONTRACT)
        return _solve(scenario, demand, slot, SlotOptions(edge_allowed=policy.edge_allowed(scenario)), solver)
    if model == MULTIHOMING:
        policy = policy or ContractPolicy.for_model(scenario, MULTIHOMING)
        return _plan_multihoming(scenario, demand, slot, solver, policy)
    raise InputError(f"unknown model {model!r}; use one of {MODELS}")


def _plan_multihoming(scenario: Scenario, demand: SlotDemand, slot: int, solver: Solver,
                      policy: ContractPolicy) -> tuple[Optional[Allocation], str]:
    U, P = demand.s.shape
    E, A = len(scenario.edge_nodes), len(scenario.cloud_nodes)
    alpha, beta = np.zeros((U, P, E)), np.zeros((U, P, E))
    theta_s, theta_c = np.zeros((U, P, A)), np.zeros((U, P, A))
    s_a = np.array([a.storage_capacity for a in scenario.cloud_nodes], dtype=float)
    c_a = np.array([a.compute_capacity for a in scenario.cloud_nodes], dtype=float)
    limits = scenario.latency_requirements()
    shares = policy.shares(scenario)
    total_s, total_c = demand.s.sum(), demand.c.sum()

    for eip, share in shares.items():
        part = demand.scaled(share[None, :])
        # Cloud capacity is divided in proportion to the demand each EIP carries.
        frac_s = part.s.sum() / total_s if total_s > 0 else 1.0 / len(shares)
        frac_c = part.c.sum() / total_c if total_c > 0 else 1.0 / len(shares)
        # A share w of the demand gets w of the latency budget: summed over
        # the EIPs the combined plan then meets the original latency rows.
        options = SlotOptions(cloud_storage=s_a * frac_s, cloud_compute=c_a * frac_c, latency_limits=limits * share)
        sub = scenario.restrict_edges([eip])
        alloc, why = _solve(sub, part, slot, options, solver)
        if alloc is None:
            return None, f"EIP {eip}: {why}"
        nodes = [scenario.edge_index(n.id) for n in sub.edge_nodes]
        w = share[None, :, None]
        alpha[:, :, nodes] += w * alloc.alpha
        beta[:, :, nodes] += w * alloc.beta
        theta_s += w * alloc.theta_s
        theta_c += w * alloc.theta_c
    return Allocation(slot, alpha, beta, theta_s, theta_c), ""


def _slot_demand_from_storage(s: np.ndarray, scenario: Scenario) -> SlotDemand:
    k_s, k_c = service_coefficients(scenario)
    return SlotDemand.from_storage(np.maximum(s, 0.0), k_s, k_c)


def run_model(model: str, scenario: Scenario, source, predictor=None, solver: Optional[Solver] = None,
              split: str = EQUAL, abort_on_infeasible: bool = False,
              resolve_on_violation: bool = False) -> ScheduleTimeline:
    """Plan, charge and audit every slot of the horizon under ``model``.

    ``predictor`` None means oracle planning (plan on actual demand). With a
    predictor, slot t is planned on a one-step forecast from the history and
    the actual demand of slots before t; when no observation exists yet the
    actual demand is used and the slot is listed in ``fallback_slots``.
    """
    source = source if isinstance(source, DemandSource) else DemandSource(source)
    solver = solver or make_solver()
    policy = None if model == FEDERATION else ContractPolicy.for_model(scenario, model, split)
    actual = source.actual
    T = actual.slot_count
    if T != scenario.time_grid.slot_count:
        raise InputError(f"demand has {T} slots, scenario has {scenario.time_grid.slot_count}")

    allocations, planned, realized, audits, predicted = [], [], [], [], []
    infeasible: dict[int, str] = {}
    fallback, resolved = [], []
    for t in range(T):
        real = actual.slot(t)
        plan_d = real
        if predictor is not None:
            seen = source.observed(t)
            if len(seen):
                pred = predictor.predict(seen, 1)
                plan_d = _slot_demand_from_storage(pred.values[0], scenario)
                if pred.fallback:
                    fallback.append(t)
            else:
                fallback.append(t)
        predicted.append(plan_d)

        alloc, why = plan_slot(model, scenario, plan_d, t, solver, policy)
        if alloc is not None and plan_d is not real:
            audit = audit_allocation(alloc, scenario, real)
            if resolve_on_violation and worst(audit) > AUDIT_TOL:
                alloc, why = plan_slot(model, scenario, real, t, solver, policy)
                resolved.append(t)
        if alloc is None:
            infeasible[t] = why
            log.info("%s slot %d infeasible: %s", model, t, why)
            if abort_on_infeasible:
                raise InfeasibleSlot(model, t, why)
            allocations.append(None)
            planned.append(None)
            realized.append(None)
            audits.append(None)
            continue
        allocations.append(alloc)
        planned.append(slot_cost(alloc, plan_d, scenario))
        realized.append(slot_cost(alloc, real, scenario))
        audits.append(audit_allocation(alloc, scenario, real))

    return ScheduleTimeline(model, allocations, planned, realized, audits, DemandSet.from_slots(predicted), actual,
                            infeasible, tuple(fallback), tuple(resolved))


def run_see(scenario: Scenario, source, predictor=None, solver: Optional[Solver] = None, **kw) -> ScheduleTimeline:
    return run_model(FEDERATION, scenario, source, predictor, solver, **kw)


def run_fixed_contract(scenario: Scenario, source, predictor=None, solver: Optional[Solver] = None,
                       **kw) -> ScheduleTimeline:
    return run_model(FIXED_CONTRACT, scenario, source, predictor, solver, **kw)


def run_multihoming(scenario: Scenario, source, predictor=None, solver: Optional[Solver] = None,
                    **kw) -> ScheduleTimeline:
    return run_model(MULTIHOMING, scenario, source, predictor, solver, **kw)


def compare_models(scenario: Scenario, source, predictor=None, solver: Optional[Solver] = None,
                   models: Sequence[str] = MODELS, split: str = EQUAL, group: Optional[str] = None, **kw):
    """Run the models on identical demand and summarize them in a SavingsReport."""
    from .reporting import build_report

    timelines = {m: run_model(m, scenario, source, predictor, solver, split=split, **kw) for m in models}
    return build_report(scenario, timelines, group=group)
