"""Reference formulation built by direct four-index enumeration.

Kept deliberately plain: one Python loop per index, coefficients collected
row by row. Only meant for small instances (cross-checking the stacked
layout), hence the size guard.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..demand import DemandSet
from ..model import InputError, Scenario
from .assemble import DEFAULT_LATENCY_MARGIN
from .problem import EQ, LE, LinearProgram

MAX_COLUMNS = 4000


def assemble_naive_lp(scenario: Scenario, demand, slot: int, latency_margin: float = DEFAULT_LATENCY_MARGIN,
                      max_columns: int = MAX_COLUMNS) -> LinearProgram:
    areas, services = scenario.areas, scenario.services
    edges, clouds = scenario.edge_nodes, scenario.cloud_nodes
    n_cols = len(areas) * len(services) * 2 * (len(edges) + len(clouds))
    if n_cols > max_columns:
        raise InputError(f"naive formulation refused: {n_cols} columns > guard {max_columns}")
    d = demand.slot(slot) if isinstance(demand, DemandSet) else demand
    pr = scenario.prices

    names: list[tuple] = []
    col_of: dict[tuple, int] = {}
    for u in range(len(areas)):
        for p in range(len(services)):
            for e in range(len(edges)):
                for kind in ("alpha", "beta"):
                    col_of[(kind, u, p, e)] = len(names)
                    names.append((kind, u, p, e))
            for a in range(len(clouds)):
                for kind in ("theta_s", "theta_c"):
                    col_of[(kind, u, p, a)] = len(names)
                    names.append((kind, u, p, a))

    cost = np.zeros(len(names))
    upper = np.ones(len(names))
    for (kind, u, p, k), j in col_of.items():
        s, s2, c = d.s[u, p], d.s_post[u, p], d.c[u, p]
        if kind == "alpha":
            cost[j] = s * edges[k].price_storage + (s + s2) * edges[k].price_comm
        elif kind == "beta":
            cost[j] = c * edges[k].price_compute
            if edges[k].compute_capacity <= 0:
                upper[j] = 0.0
        elif kind == "theta_s":
            cost[j] = s * pr.cloud_storage + (s + s2) * pr.cloud_comm
        else:
            cost[j] = c * pr.cloud_compute
            if clouds[k].compute_capacity <= 0:
                upper[j] = 0.0

    rows: list[dict[int, float]] = []
    sense: list[str] = []
    rhs: list[float] = []
    row_names: list[str] = []

    def add(name, coefs, sn, value):
        rows.append(coefs)
        sense.append(sn)
        rhs.append(value)
        row_names.append(name)

    for u in range(len(areas)):
        for p in range(len(services)):
            storage = {col_of[("alpha", u, p, e)]: 1.0 for e in range(len(edges))}
            storage.update({col_of[("theta_s", u, p, a)]: 1.0 for a in range(len(clouds))})
            add(f"storage_conservation[p={p},u={u}]", storage, EQ, 1.0)
            compute = {col_of[("beta", u, p, e)]: 1.0 for e in range(len(edges))}
            compute.update({col_of[("theta_c", u, p, a)]: 1.0 for a in range(len(clouds))})
            add(f"compute_conservation[p={p},u={u}]", compute, EQ, 1.0)

    for u, area in enumerate(areas):
        for p, svc in enumerate(services):
            s, s2, c = d.s[u, p], d.s_post[u, p], d.c[u, p]
            coefs = {}
            for e, node in enumerate(edges):
                coefs[col_of[("alpha", u, p, e)]] = (s + s2) * scenario.edge_distances[u, e]
                if node.compute_capacity > 0:
                    coefs[col_of[("beta", u, p, e)]] = c * svc.r_p / node.compute_capacity
            for a, node in enumerate(clouds):
                coefs[col_of[("theta_s", u, p, a)]] = (s + s2) * scenario.cloud_distances[u, a]
                if node.compute_capacity > 0:
                    coefs[col_of[("theta_c", u, p, a)]] = c * svc.r_p / node.compute_capacity
            add(f"latency[p={p},u={u}]", coefs, LE, svc.latency_requirement * (1.0 - latency_margin))

    for e, node in enumerate(edges):
        add(f"edge_storage[e={e}]", {col_of[("alpha", u, p, e)]: d.s[u, p]
                                     for u in range(len(areas)) for p in range(len(services))},
            LE, node.storage_capacity)
        add(f"edge_compute[e={e}]", {col_of[("beta", u, p, e)]: d.c[u, p]
                                     for u in range(len(areas)) for p in range(len(services))},
            LE, node.compute_capacity)
    for a, node in enumerate(clouds):
        add(f"cloud_storage[a={a}]", {col_of[("theta_s", u, p, a)]: d.s[u, p]
                                      for u in range(len(areas)) for p in range(len(services))},
            LE, node.storage_capacity)
        add(f"cloud_compute[a={a}]", {col_of[("theta_c", u, p, a)]: d.c[u, p]
                                      for u in range(len(areas)) for p in range(len(services))},
            LE, node.compute_capacity)

    A = sp.lil_matrix((len(rows), len(names)))
    for i, coefs in enumerate(rows):
        for j, v in coefs.items():
            if v != 0:
                A[i, j] = v
    return LinearProgram(cost, A.tocsr(), np.array(sense), np.array(rhs), np.zeros(len(names)), upper,
                         None, row_names, [f"{k}[u={u},p={p},n={n}]" for k, u, p, n in names])


def column_order(scenario: Scenario) -> Sequence[tuple]:
    """(kind, area, service, node) of each naive column, in order."""
    out = []
    for u in range(len(scenario.areas)):
        for p in range(len(scenario.services)):
            for e in range(len(scenario.edge_nodes)):
                out += [("alpha", u, p, e), ("beta", u, p, e)]
            for a in range(len(scenario.cloud_nodes)):
                out += [("theta_s", u, p, a), ("theta_c", u, p, a)]
    return out

