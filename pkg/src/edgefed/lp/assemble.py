"""Assembly of the provisioning LP in the stacked two-dimensional layout.

Every cost or constraint term of one kind and one (slot, service) pair is
an outer product of an area-indexed demand vector with a node-indexed
vector (prices, distances or inverse capacities). Flattened in the
:class:`VariableIndex` order these blocks give the objective and the
constraint coefficients directly, without four-index loops.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..demand import DemandSet, SlotDemand
from ..model import Scenario
from .problem import EQ, LE, LinearProgram, VariableIndex

# Relative tightening of the latency right-hand side so that solutions
# accepted at solver tolerance still meet l_p exactly.
DEFAULT_LATENCY_MARGIN = 1e-9


@dataclass(frozen=True)
class SlotOptions:
    """Per-model tweaks of a slot LP.

    edge_allowed: bool [service, edge]; disallowed edge columns are fixed at 0.
    cloud_storage / cloud_compute: per-cloud capacity overrides.
    latency_limits: per-service right-hand sides replacing ``l_p``.
    """

    edge_allowed: Optional[np.ndarray] = None
    cloud_storage: Optional[np.ndarray] = None
    cloud_compute: Optional[np.ndarray] = None
    latency_limits: Optional[np.ndarray] = None
    latency_margin: float = DEFAULT_LATENCY_MARGIN


class _Rows:
    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self.b: list[float] = []
        self.sense: list[str] = []
        self.names: list[str] = []

    def add_block(self, first_row: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        self.rows.append(first_row + rows.ravel())
        self.cols.append(cols.ravel())
        self.vals.append(np.asarray(vals, dtype=float).ravel())

    def add_rows(self, names: Sequence[str], sense: str, rhs) -> int:
        first = len(self.b)
        self.names.extend(names)
        self.sense.extend([sense] * len(names))
        self.b.extend(np.broadcast_to(np.asarray(rhs, dtype=float), (len(names),)).tolist())
        return first

    def matrix(self) -> sp.csr_matrix:
        if self.rows:
            r, c, v = np.concatenate(self.rows), np.concatenate(self.cols), np.concatenate(self.vals)
        else:
            r = c = np.zeros(0, dtype=int)
            v = np.zeros(0)
        # Duplicates cannot occur; keep explicit zeros out of the pattern.
        keep = v != 0
        return sp.csr_matrix((v[keep], (r[keep], c[keep])), shape=(len(self.b), self.n_cols))


def _slot_demand(demand, slot: int) -> SlotDemand:
    return demand.slot(slot) if isinstance(demand, DemandSet) else demand


def assemble_lp(scenario: Scenario, demand, slots: Sequence[int], options: Optional[SlotOptions] = None) -> LinearProgram:
    """The cost-minimization LP over ``slots`` (independent per slot)."""
    opts = options or SlotOptions()
    U, P = len(scenario.areas), len(scenario.services)
    E, A = len(scenario.edge_nodes), len(scenario.cloud_nodes)
    idx = VariableIndex(U, P, E, A, tuple(slots))
    n = idx.n_columns

    pr = scenario.prices
    v_s = np.array([e.price_storage for e in scenario.edge_nodes], dtype=float)
    v_c = np.array([e.price_compute for e in scenario.edge_nodes], dtype=float)
    v_m = np.array([e.price_comm for e in scenario.edge_nodes], dtype=float)
    s_e = np.array([e.storage_capacity for e in scenario.edge_nodes], dtype=float)
    c_e = np.array([e.compute_capacity for e in scenario.edge_nodes], dtype=float)
    s_a = np.array([a.storage_capacity for a in scenario.cloud_nodes], dtype=float)
    c_a = np.array([a.compute_capacity for a in scenario.cloud_nodes], dtype=float)
    # Latency terms always use the physical capacities.
    inv_ce = np.divide(1.0, c_e, out=np.zeros(E), where=c_e > 0)
    inv_ca = np.divide(1.0, c_a, out=np.zeros(A), where=c_a > 0)
    no_compute_a = c_a <= 0
    if opts.cloud_storage is not None:
        s_a = np.asarray(opts.cloud_storage, dtype=float)
    if opts.cloud_compute is not None:
        c_a = np.asarray(opts.cloud_compute, dtype=float)
    h_e = scenario.edge_distances  # [U, E]
    h_a = scenario.cloud_distances  # [U, A]
    r_p = np.array([s.r_p for s in scenario.services], dtype=float)
    limits = scenario.latency_requirements() if opts.latency_limits is None else np.asarray(opts.latency_limits, float)
    limits = limits * (1.0 - opts.latency_margin)

    c = np.zeros(n)
    lower = np.zeros(n)
    upper = np.ones(n)
    rows = _Rows(n)

    for t in slots:
        d = _slot_demand(demand, t)
        size = d.s + d.s_post  # [U, P]
        # Column numbers of each kind as [service, area, node] arrays.
        cols = {k: np.arange(idx.block(k, t).start, idx.block(k, t).stop).reshape(P, U, idx.nodes(k))
                for k in ("alpha", "beta", "theta_s", "theta_c")}
        S, C, SZ = d.s.T, d.c.T, size.T  # [P, U]

        c[cols["alpha"]] = S[:, :, None] * v_s + SZ[:, :, None] * v_m
        c[cols["beta"]] = C[:, :, None] * v_c
        c[cols["theta_s"]] = S[:, :, None] * pr.cloud_storage + SZ[:, :, None] * pr.cloud_comm
        c[cols["theta_c"]] = np.broadcast_to(C[:, :, None] * pr.cloud_compute, cols["theta_c"].shape)

        # Nodes without compute capacity cannot take compute (and have no latency term).
        upper[cols["beta"][:, :, c_e <= 0]] = 0.0
        upper[cols["theta_c"][:, :, no_compute_a]] = 0.0
        if opts.edge_allowed is not None:
            banned = ~np.asarray(opts.edge_allowed, dtype=bool)  # [P, E]
            upper[cols["alpha"][np.broadcast_to(banned[:, None, :], cols["alpha"].shape)]] = 0.0
            upper[cols["beta"][np.broadcast_to(banned[:, None, :], cols["beta"].shape)]] = 0.0

        # Cloud capacities, one row per node: sum_{u,p} S theta_s <= S_a.
        r0 = rows.add_rows([f"cloud_storage[t={t},a={a}]" for a in range(A)], LE, s_a)
        rows.add_block(r0, np.broadcast_to(np.arange(A), cols["theta_s"].shape), cols["theta_s"],
                       np.broadcast_to(S[:, :, None], cols["theta_s"].shape))
        r0 = rows.add_rows([f"cloud_compute[t={t},a={a}]" for a in range(A)], LE, c_a)
        rows.add_block(r0, np.broadcast_to(np.arange(A), cols["theta_c"].shape), cols["theta_c"],
                       np.broadcast_to(C[:, :, None], cols["theta_c"].shape))
        # Edge capacities.
        r0 = rows.add_rows([f"edge_storage[t={t},e={e}]" for e in range(E)], LE, s_e)
        rows.add_block(r0, np.broadcast_to(np.arange(E), cols["alpha"].shape), cols["alpha"],
                       np.broadcast_to(S[:, :, None], cols["alpha"].shape))
        r0 = rows.add_rows([f"edge_compute[t={t},e={e}]" for e in range(E)], LE, c_e)
        rows.add_block(r0, np.broadcast_to(np.arange(E), cols["beta"].shape), cols["beta"],
                       np.broadcast_to(C[:, :, None], cols["beta"].shape))

        # Conservation, one row per (service, area) in block order.
        pair = np.arange(P * U).reshape(P, U)
        names = [f"storage_conservation[t={t},p={p},u={u}]" for p in range(P) for u in range(U)]
        r0 = rows.add_rows(names, EQ, 1.0)
        for k in ("alpha", "theta_s"):
            rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols[k].shape), cols[k], np.ones(cols[k].size))
        names = [f"compute_conservation[t={t},p={p},u={u}]" for p in range(P) for u in range(U)]
        r0 = rows.add_rows(names, EQ, 1.0)
        for k in ("beta", "theta_c"):
            rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols[k].shape), cols[k], np.ones(cols[k].size))

        # Latency: (S + S') h for storage fractions, C r_p / capacity for compute.
        names = [f"latency[t={t},p={p},u={u}]" for p in range(P) for u in range(U)]
        r0 = rows.add_rows(names, LE, np.repeat(limits, U))
        rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols["alpha"].shape), cols["alpha"],
                       SZ[:, :, None] * h_e[None, :, :])
        rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols["theta_s"].shape), cols["theta_s"],
                       SZ[:, :, None] * h_a[None, :, :])
        compute = C * r_p[:, None]  # [P, U]
        rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols["beta"].shape), cols["beta"],
                       compute[:, :, None] * inv_ce)
        rows.add_block(r0, np.broadcast_to(pair[:, :, None], cols["theta_c"].shape), cols["theta_c"],
                       compute[:, :, None] * inv_ca)

    return LinearProgram(c, rows.matrix(), np.array(rows.sense), np.array(rows.b), lower, upper, idx, rows.names)


def assemble_slot_lp(scenario: Scenario, demand, slot: int, options: Optional[SlotOptions] = None) -> LinearProgram:
    return assemble_lp(scenario, demand, [slot], options)
