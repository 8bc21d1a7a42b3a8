"""Reference computations that share no code with the package."""
from __future__ import annotations

import itertools
import math

import numpy as np


def haversine_km(a, b, radius=6371.0088):
    lat1, lon1, lat2, lon2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * radius * math.asin(min(1.0, math.sqrt(h)))


def simplex_grid(parts: int, step: float) -> np.ndarray:
    """All ``parts``-tuples of multiples of ``step`` summing to 1."""
    n = int(round(1 / step))
    rows = [c + (n - sum(c),) for c in itertools.product(range(n + 1), repeat=parts - 1) if sum(c) <= n]
    return np.array(rows, dtype=float) / n


def grid_oracle(inst, step=0.05):
    """Cheapest allocation on the fraction grid, by exhaustive search.

    ``inst`` is a plain dict (see tests.instances.tiny_instance). Compute
    capacities must not bind; storage capacities may. At most two
    (area, service) pairs. Returns ``inf`` when no grid point is feasible.
    """
    S, S2, C = inst["S"], inst["S_post"], inst["C"]  # [U, P]
    U, P = S.shape
    pairs = [(u, p) for u in range(U) for p in range(P)]
    assert len(pairs) <= 2
    E = len(inst["edge_storage_price"])
    grid = simplex_grid(E + 1, step)  # columns: edges..., cloud
    v_s = np.append(inst["edge_storage_price"], inst["cloud_storage_price"])
    v_m = np.append(inst["edge_comm_price"], inst["cloud_comm_price"])
    v_c = np.append(inst["edge_compute_price"], inst["cloud_compute_price"])
    inv_cap = np.array([1 / c if c > 0 else 0.0 for c in np.append(inst["edge_compute_cap"], inst["cloud_compute_cap"])])
    no_compute = np.append(inst["edge_compute_cap"], inst["cloud_compute_cap"]) <= 0
    compute_ok = ~(grid[:, no_compute] > 0).any(axis=1)

    per_pair = []
    for u, p in pairs:
        dist = np.append(inst["edge_dist"][u], inst["cloud_dist"][u])
        s_cost = grid @ (S[u, p] * v_s + (S[u, p] + S2[u, p]) * v_m)
        s_lat = (S[u, p] + S2[u, p]) * (grid @ dist)
        c_cost = np.where(compute_ok, grid @ (C[u, p] * v_c), np.inf)
        c_lat = C[u, p] * inst["r_p"][p] * (grid @ inv_cap)
        order = np.argsort(c_lat, kind="stable")
        best_cost = np.minimum.accumulate(c_cost[order])
        lat_sorted = c_lat[order]
        limit = inst["limit"][p]
        budget = limit - s_lat
        k = np.searchsorted(lat_sorted, budget + 1e-12 * max(1.0, limit), side="right")
        total = np.where(k > 0, s_cost + best_cost[np.maximum(k - 1, 0)], np.inf)
        use = S[u, p] * grid  # storage placed on each edge and the cloud
        per_pair.append((total, use))

    caps = np.append(inst["edge_storage_cap"], inst["cloud_storage_cap"])
    if len(per_pair) == 1:
        total, use = per_pair[0]
        ok = (use <= caps + 1e-12).all(axis=1)
        return float(np.min(np.where(ok, total, np.inf)))
    (t1, u1), (t2, u2) = per_pair
    best = np.inf
    for i in np.flatnonzero(np.isfinite(t1)):
        load = u1[i] + u2
        ok = (load <= caps + 1e-12).all(axis=1)
        if ok.any():
            best = min(best, t1[i] + float(np.min(np.where(ok, t2, np.inf))))
    return best


def read_mps(text: str):
    """Minimal MPS reader: returns (c, A dense, sense, b, lower, upper) with R<i>/C<j> names."""
    section = None
    rows, cols, coef, rhs, bounds = {}, set(), {}, {}, {}
    obj = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        f = line.split()
        if section == "ROWS":
            if f[0] == "N":
                obj = f[1]
            else:
                rows[f[1]] = f[0]
        elif section == "COLUMNS":
            cols.add(f[0])
            for name, val in zip(f[1::2], f[2::2]):
                coef[(name, f[0])] = float(val)
        elif section == "RHS":
            for name, val in zip(f[1::2], f[2::2]):
                rhs[name] = float(val)
        elif section == "BOUNDS":
            bounds.setdefault(f[2], []).append((f[0], float(f[3]) if len(f) > 3 else None))
    m = len(rows)
    n = 1 + max(int(c[1:]) for c in cols)
    c = np.zeros(n)
    A = np.zeros((m, n))
    for (r, col), v in coef.items():
        j = int(col[1:])
        if r == obj:
            c[j] = v
        else:
            A[int(r[1:]), j] = v
    sense = np.array([rows[f"R{i}"] for i in range(m)])
    b = np.array([rhs.get(f"R{i}", 0.0) for i in range(m)])
    lower, upper = np.zeros(n), np.full(n, np.inf)
    for col, items in bounds.items():
        j = int(col[1:])
        for kind, v in items:
            if kind == "UP":
                upper[j] = v
            elif kind == "LO":
                lower[j] = v
            elif kind == "FX":
                lower[j] = upper[j] = v
            elif kind == "MI":
                lower[j] = -np.inf
    return c, A, sense, b, lower, upper
