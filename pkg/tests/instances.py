"""Random small scenarios for property and oracle tests."""
from __future__ import annotations

import numpy as np

from edgefed.demand import SlotDemand
from edgefed.model import CloudNode, Contracts, EdgeNode, PriceBook, Scenario, Service, TimeGrid, UserArea


def random_scenario(rng: np.random.Generator, n_areas=2, n_services=2, n_edges=2, n_clouds=1, eips=("A", "B"),
                    zero_compute_prob=0.0, storage_cap=(0.3, 1.5), latency=(0.6, 2.5)):
    """Scenario plus one slot of random demand, on a plane."""
    S = rng.uniform(0.5, 5.0, size=(n_areas, n_services))
    k_s = rng.uniform(0.1, 1.0, size=n_services)
    k_c = rng.uniform(0.2, 2.0, size=n_services)
    demand = SlotDemand.from_storage(S, k_s, k_c)
    total_s, total_c = S.sum(), demand.c.sum()

    areas = tuple(UserArea(f"u{i}", tuple(rng.uniform(0, 10, 2)), 1.0) for i in range(n_areas))
    edges = []
    for e in range(n_edges):
        compute = 0.0 if rng.random() < zero_compute_prob else float(total_c * rng.uniform(1.0, 3.0))
        edges.append(EdgeNode(f"e{e}", eips[e % len(eips)], tuple(rng.uniform(0, 10, 2)),
                              float(total_s * rng.uniform(*storage_cap)), compute,
                              float(rng.uniform(1, 5)), float(rng.uniform(0.5, 3)), float(rng.uniform(0.1, 2))))
    clouds = []
    for a in range(n_clouds):
        ang = rng.uniform(0, 2 * np.pi)
        r = rng.uniform(30, 60)
        clouds.append(CloudNode(f"c{a}", (5 + r * np.cos(ang), 5 + r * np.sin(ang)),
                                float(total_s * rng.uniform(0.5, 2.0)), float(total_c * rng.uniform(1.0, 3.0))))
    r_p = rng.uniform(0.5, 2.0, size=n_services)

    # Latency limits scaled from the edge-only latency so some instances use the cloud.
    scen = Scenario("random", TimeGrid(1), areas, tuple(
        Service(f"s{p}", f"s{p}", float(k_s[p]), float(k_c[p]), float(r_p[p]), 1.0, (1.0,)) for p in range(n_services)),
        tuple(edges), tuple(clouds),
        PriceBook(float(rng.uniform(0.2, 1.5)), float(rng.uniform(0.1, 1.0)), float(rng.uniform(0.05, 0.5))),
        float(n_areas), contracts=Contracts({f"s{p}": (eips[0],) for p in range(n_services)},
                                            {f"s{p}": tuple(eips) for p in range(n_services)}))
    size = demand.s + demand.s_post
    edge_lat = (size[:, :, None] * scen.edge_distances[:, None, :]).mean(axis=2).max(axis=0)
    limits = {f"s{p}": float(edge_lat[p] * rng.uniform(*latency) + 0.5) for p in range(n_services)}
    return scen.with_latency_requirements(limits), demand


def oracle_input(scen: Scenario, demand: SlotDemand) -> dict:
    """Plain-number description of a one-slot instance for tests.oracles.grid_oracle."""
    return {
        "S": demand.s, "S_post": demand.s_post, "C": demand.c,
        "edge_storage_price": np.array([e.price_storage for e in scen.edge_nodes]),
        "edge_compute_price": np.array([e.price_compute for e in scen.edge_nodes]),
        "edge_comm_price": np.array([e.price_comm for e in scen.edge_nodes]),
        "cloud_storage_price": scen.prices.cloud_storage,
        "cloud_compute_price": scen.prices.cloud_compute,
        "cloud_comm_price": scen.prices.cloud_comm,
        "edge_storage_cap": np.array([e.storage_capacity for e in scen.edge_nodes]),
        "edge_compute_cap": np.array([e.compute_capacity for e in scen.edge_nodes]),
        "cloud_storage_cap": np.array([c.storage_capacity for c in scen.cloud_nodes]),
        "cloud_compute_cap": np.array([c.compute_capacity for c in scen.cloud_nodes]),
        "edge_dist": scen.edge_distances, "cloud_dist": scen.cloud_distances,
        "r_p": np.array([s.r_p for s in scen.services]),
        "limit": np.array([s.latency_requirement for s in scen.services]),
    }
