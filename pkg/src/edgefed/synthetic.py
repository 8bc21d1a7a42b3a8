"""Seeded Toronto-like scenarios (synthetic stand-ins, not the real datasets).

Three EIPs modelled on the Toronto operators: Telus with few, centrally
clustered nodes, Rogers spread evenly, Bell concentrated in the west. Two distant clouds (Montreal and a US midwest site). Service profiles
are smooth daily curves shaped like social media (daytime peak), gaming
and video (evening peaks); they are look-alikes, not measured traffic.

A larger node count always extends the smaller layout for the same seed, so
the 50-node network contains the 30-node one.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import numpy as np

from .groups import TABLE_GROUPS
from .model import (GEODETIC, CloudNode, Contracts, EdgeNode, PriceBook, Scenario, Service, TimeGrid,
                    UserArea)

TORONTO_LAT = (43.60, 43.84)
TORONTO_LON = (-79.60, -79.16)
DOWNTOWN = (43.65, -79.38)

CLOUDS = (
    ("montreal", (45.5017, -73.5673)),
    ("council-bluffs", (41.2619, -95.8608)),
)

# name, k_s, k_c, r_p, evening/day peak hour, spread (hours), floor
SERVICES = (
    ("facebook", "Facebook", 0.1, 1.0, 1.0, 14.0, 4.0, 0.35),
    ("valve", "Valve", 0.4, 2.0, 2.0, 22.0, 3.0, 0.15),
    ("netflix", "Netflix", 1.0, 0.5, 1.5, 21.0, 3.5, 0.10),
)

EIPS = ("Telus", "Rogers", "Bell")
# storage, compute, comm price per unit (before per-node jitter). The EIPs
# trade storage against transfer price, so which one is cheapest depends on
# a service's post-processing ratio k_s: Bell for Facebook, Telus for Valve,
# Rogers for Netflix. None of these is the service's fixed-contract partner.
EIP_PRICES = {
    "Telus": (2.5, 1.5, 1.8),
    "Rogers": (4.0, 1.8, 1.0),
    "Bell": (1.0, 1.9, 3.0),
}
CLOUD_PRICES = PriceBook(cloud_storage=1.0, cloud_compute=0.5, cloud_comm=0.2)

NODE_POOL = 200

FIXED_CONTRACT = {"facebook": ("Telus",), "valve": ("Rogers",), "netflix": ("Bell",)}
MULTIHOMING = {"facebook": ("Telus", "Bell"), "valve": ("Telus", "Rogers"), "netflix": ("Rogers", "Bell")}


def daily_profile(peak_hour: float, spread: float, floor: float, slots: int = 24) -> tuple[float, ...]:
    hours = np.arange(slots) * 24.0 / slots
    gap = np.abs(hours - peak_hour)
    gap = np.minimum(gap, 24.0 - gap)
    curve = floor + (1 - floor) * np.exp(-0.5 * (gap / spread) ** 2)
    curve = curve / curve.max()
    return tuple(round(float(v), 6) for v in curve)


def _node_layout(rng: np.random.Generator, count: int) -> list[tuple[str, tuple[float, float]]]:
    """EIP and location for ``count`` nodes; prefixes of the list are stable across counts."""
    # Per block of ten: two Telus, four Rogers, four Bell.
    cycle = ("Telus", "Rogers", "Bell", "Rogers", "Bell", "Rogers", "Bell", "Telus", "Rogers", "Bell")
    out = []
    for k in range(count):
        eip = cycle[k % 10]
        u, v = rng.random(), rng.random()
        if eip == "Telus":
            lat = DOWNTOWN[0] + (u - 0.5) * 0.12
            lon = DOWNTOWN[1] + (v - 0.5) * 0.20
        elif eip == "Bell":
            lat = TORONTO_LAT[0] + u * (TORONTO_LAT[1] - TORONTO_LAT[0])
            lon = TORONTO_LON[0] + (v ** 1.6) * (TORONTO_LON[1] - TORONTO_LON[0])
        else:
            lat = TORONTO_LAT[0] + u * (TORONTO_LAT[1] - TORONTO_LAT[0])
            lon = TORONTO_LON[0] + v * (TORONTO_LON[1] - TORONTO_LON[0])
        out.append((eip, (round(lat, 5), round(lon, 5))))
    return out


def toronto_scenario(edge_nodes: int = 30, seed: int = 7, grid: int = 4, total_population: float = 270.0,
                     distance_scale: float = 0.01, slots: int = 24, name: Optional[str] = None,
                     group: str = "1") -> Scenario:
    """Toronto-like scenario with ``edge_nodes`` nodes over three EIPs.

    Areas are a ``grid x grid`` partition of the city; population decays with
    distance from downtown. Node placement and price jitter come from
    ``seed``; the area layout and profiles do not depend on it.
    """
    if not 0 <= edge_nodes <= NODE_POOL:
        raise ValueError(f"edge_nodes must be in [0, {NODE_POOL}]")
    # Draw the whole pool so a node's attributes do not depend on the count.
    rng = np.random.default_rng(seed)
    layout = _node_layout(rng, NODE_POOL)[:edge_nodes]
    jitter = rng.uniform(0.95, 1.05, size=(NODE_POOL, 3))
    cap_jitter = rng.uniform(0.9, 1.1, size=NODE_POOL)

    areas = []
    weights = []
    for i in range(grid):
        for j in range(grid):
            lat = TORONTO_LAT[0] + (i + 0.5) * (TORONTO_LAT[1] - TORONTO_LAT[0]) / grid
            lon = TORONTO_LON[0] + (j + 0.5) * (TORONTO_LON[1] - TORONTO_LON[0]) / grid
            km = math.hypot((lat - DOWNTOWN[0]) * 111.0, (lon - DOWNTOWN[1]) * 80.4)
            weights.append(0.3 + math.exp(-km / 8.0))
            areas.append((f"area-{i}{j}", (round(lat, 5), round(lon, 5))))
    weights = np.array(weights) / sum(weights)
    pops = np.round(weights * total_population, 6)
    pops[-1] = round(total_population - pops[:-1].sum(), 6)
    area_objs = tuple(UserArea(a, loc, float(p)) for (a, loc), p in zip(areas, pops))
    total = float(sum(a.population for a in area_objs))

    requirements = TABLE_GROUPS[str(group)]
    services = tuple(
        Service(sid, label, k_s, k_c, r_p, requirements[sid], daily_profile(peak, spread, floor, slots))
        for sid, label, k_s, k_c, r_p, peak, spread, floor in SERVICES
    )

    # Edge capacity: the per-node share of the peak storage demand, with headroom.
    peak_storage = total * max(sum(s.profile[t] for s in services) for t in range(slots))
    base_storage = 2.2 * peak_storage / 30.0
    nodes = []
    for k, (eip, loc) in enumerate(layout):
        ps, pc, pm = EIP_PRICES[eip]
        nodes.append(EdgeNode(
            id=f"{eip.lower()}-{k:02d}", owner_eip=eip, location=loc,
            storage_capacity=round(float(base_storage * cap_jitter[k]), 6),
            compute_capacity=round(float(base_storage * cap_jitter[k]), 6),
            price_storage=round(float(ps * jitter[k, 0]), 6),
            price_compute=round(float(pc * jitter[k, 1]), 6),
            price_comm=round(float(pm * jitter[k, 2]), 6),
        ))

    k_c_max = max(s.k_c for s in services)
    clouds = tuple(
        CloudNode(cid, loc, storage_capacity=round(peak_storage, 6),
                  compute_capacity=round(peak_storage * k_c_max * 10, 6))
        for cid, loc in CLOUDS
    )
    groups = {g: {sid: v for sid, v in table.items()} for g, table in TABLE_GROUPS.items()}
    return Scenario(
        name=name or f"toronto{edge_nodes}",
        time_grid=TimeGrid(slots, 24.0 / slots),
        areas=area_objs,
        services=services,
        edge_nodes=tuple(nodes),
        cloud_nodes=clouds,
        prices=CLOUD_PRICES,
        total_population=total,
        distance_scale=distance_scale,
        coordinate_mode=GEODETIC,
        contracts=Contracts(dict(FIXED_CONTRACT), dict(MULTIHOMING)),
        satisfaction_bounds=(0.99, 1.0),
        latency_groups=groups,
    )


def unit_scenario(slots: int = 24) -> Scenario:
    """Four edge nodes of two EIPs around four areas on a plane, one distant cloud."""
    areas = tuple(UserArea(f"a{i}", loc, pop) for i, (loc, pop) in
                  enumerate((((0.0, 0.0), 40.0), ((4.0, 0.0), 25.0), ((0.0, 4.0), 20.0), ((4.0, 4.0), 15.0))))
    services = (
        Service("web", "Web", 0.2, 1.0, 1.0, 40.0, daily_profile(13.0, 4.0, 0.3, slots)),
        Service("video", "Video", 1.0, 0.5, 1.5, 60.0, daily_profile(21.0, 3.0, 0.1, slots)),
    )
    # A: cheap storage, dear transfer; B the other way round.
    spec = (("e0", "A", (1.0, 1.0)), ("e1", "A", (3.0, 3.0)), ("e2", "B", (3.0, 1.0)), ("e3", "B", (1.0, 3.0)))
    prices = {"A": (2.0, 1.5, 1.5), "B": (3.0, 1.5, 0.5)}
    edges = tuple(EdgeNode(i, eip, loc, 100.0, 100.0, *prices[eip]) for i, eip, loc in spec)
    cloud = (CloudNode("c0", (100.0, 0.0), 250.0, 10000.0),)
    return Scenario(
        name="unit4",
        time_grid=TimeGrid(slots, 24.0 / slots),
        areas=areas,
        services=services,
        edge_nodes=edges,
        cloud_nodes=cloud,
        prices=CLOUD_PRICES,
        total_population=100.0,
        distance_scale=0.1,
        contracts=Contracts({"web": ("A",), "video": ("A",)}, {"web": ("A", "B"), "video": ("A", "B")}),
        latency_groups={"1": {"web": 40.0, "video": 60.0}, "2": {"web": 30.0, "video": 45.0}},
    )


def write_bundled(directory) -> list:
    """Regenerate the bundled scenario documents."""
    from .scenario_file import dump_scenario

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    note = ("SYNTHETIC stand-in, not measured data.\n"
            "Generated by edgefed.synthetic.{call}; regenerate with python -m edgefed.synthetic DIR")
    out = []
    for name, scen, call in (
        ("unit4", unit_scenario(), "unit_scenario()"),
        ("toronto30", toronto_scenario(30), "toronto_scenario(edge_nodes=30, seed=7)"),
        ("toronto50", toronto_scenario(50), "toronto_scenario(edge_nodes=50, seed=7)"),
    ):
        path = directory / f"{name}.yaml"
        path.write_text(dump_scenario(scen, note.format(call=call)), encoding="utf-8")
        out.append(path)
    return out


if __name__ == "__main__":
    import sys

    for p in write_bundled(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "scenarios"):
        print(p)
