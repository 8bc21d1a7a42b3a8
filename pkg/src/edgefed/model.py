"""Domain types for the edge federation: network, services, prices, time grid.

Everything here is immutable after construction. Arrays exposed by
:class:`Allocation` are flagged read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0088
CONSERVATION_TOL = 1e-9

PLANAR = "planar"
GEODETIC = "geodetic"


class InputError(ValueError):
    """Raised for malformed or inconsistent user input."""


@dataclass(frozen=True)
class TimeGrid:
    slot_count: int
    slot_length_hours: float = 1.0

    def __post_init__(self):
        if int(self.slot_count) != self.slot_count or self.slot_count < 1:
            raise InputError(f"slot_count must be a positive integer, got {self.slot_count!r}")
        if not self.slot_length_hours > 0:
            raise InputError("slot_length_hours must be positive")


@dataclass(frozen=True)
class UserArea:
    id: str
    location: tuple[float, float]
    population: float


@dataclass(frozen=True)
class Service:
    id: str
    name: str
    k_s: float
    k_c: float
    r_p: float
    latency_requirement: float
    profile: tuple[float, ...]


@dataclass(frozen=True)
class EdgeNode:
    id: str
    owner_eip: str
    location: tuple[float, float]
    storage_capacity: float
    compute_capacity: float
    price_storage: float
    price_compute: float
    price_comm: float


@dataclass(frozen=True)
class CloudNode:
    id: str
    location: tuple[float, float]
    storage_capacity: float
    compute_capacity: float


@dataclass(frozen=True)
class PriceBook:
    """Uniform unit prices shared by every cloud node."""

    cloud_storage: float
    cloud_compute: float
    cloud_comm: float


@dataclass(frozen=True)
class Contracts:
    """Service -> EIP assignments used by the two baseline models.

    ``fixed_contract`` must name exactly one EIP per service, ``multihoming``
    at least one. Federation ignores both.
    """

    fixed_contract: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    multihoming: Mapping[str, tuple[str, ...]] = field(default_factory=dict)


def check_location(location: Sequence[float], mode: str) -> tuple[float, float]:
    if len(location) != 2:
        raise InputError(f"location must have two coordinates, got {location!r}")
    try:
        a, b = float(location[0]), float(location[1])
    except (TypeError, ValueError) as exc:
        raise InputError(f"non-numeric coordinates {location!r}") from exc
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InputError(f"non-finite coordinates {location!r}")
    if mode == GEODETIC and not (-90.0 <= a <= 90.0 and -180.0 <= b <= 180.0):
        raise InputError(f"latitude/longitude out of range: {location!r}")
    if mode not in (PLANAR, GEODETIC):
        raise InputError(f"unknown coordinate mode {mode!r}")
    return a, b


def distance(node_location, area_location, scale: float = 1.0, mode: str = PLANAR) -> float:
    """Delivery distance in latency units between two locations.

    Planar coordinates use the Euclidean norm; geodetic ones are
    ``(lat, lon)`` degrees and use the great-circle distance in km
    (angle from the atan2 of cross and dot products of unit vectors).
    """
    if not scale > 0:
        raise InputError("distance_scale must be positive")
    a = check_location(node_location, mode)
    b = check_location(area_location, mode)
    if mode == PLANAR:
        return math.hypot(a[0] - b[0], a[1] - b[1]) * scale
    ua, ub = _unit_vector(*a), _unit_vector(*b)
    cross = np.cross(ua, ub)
    angle = math.atan2(float(np.linalg.norm(cross)), float(np.dot(ua, ub)))
    return angle * EARTH_RADIUS_KM * scale


def _unit_vector(lat: float, lon: float) -> np.ndarray:
    phi, lam = math.radians(lat), math.radians(lon)
    return np.array([math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)])


@dataclass(frozen=True)
class Scenario:
    """Topology, services, prices and contracts of one experiment."""

    name: str
    time_grid: TimeGrid
    areas: tuple[UserArea, ...]
    services: tuple[Service, ...]
    edge_nodes: tuple[EdgeNode, ...]
    cloud_nodes: tuple[CloudNode, ...]
    prices: PriceBook
    total_population: float
    distance_scale: float = 1.0
    coordinate_mode: str = PLANAR
    contracts: Contracts = field(default_factory=Contracts)
    satisfaction_bounds: tuple[float, float] = (0.99, 1.0)
    latency_groups: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    @property
    def eips(self) -> tuple[str, ...]:
        seen = dict.fromkeys(e.owner_eip for e in self.edge_nodes)
        return tuple(seen)

    def service_index(self, service_id: str) -> int:
        for i, s in enumerate(self.services):
            if s.id == service_id:
                return i
        raise InputError(f"unknown service {service_id!r}")

    def edge_index(self, node_id: str) -> int:
        for i, e in enumerate(self.edge_nodes):
            if e.id == node_id:
                return i
        raise InputError(f"unknown edge node {node_id!r}")

    def area_index(self, area_id: str) -> int:
        for i, a in enumerate(self.areas):
            if a.id == area_id:
                return i
        raise InputError(f"unknown area {area_id!r}")

    @cached_property
    def edge_distances(self) -> np.ndarray:
        """h_u^e as an [area, edge] array."""
        return self._distances(self.edge_nodes)

    @cached_property
    def cloud_distances(self) -> np.ndarray:
        """h_u^a as an [area, cloud] array."""
        return self._distances(self.cloud_nodes)

    def _distances(self, nodes) -> np.ndarray:
        out = np.zeros((len(self.areas), len(nodes)))
        for i, area in enumerate(self.areas):
            for j, node in enumerate(nodes):
                out[i, j] = distance(node.location, area.location, self.distance_scale, self.coordinate_mode)
        out.setflags(write=False)
        return out

    @cached_property
    def catchment(self) -> np.ndarray:
        """Index of the nearest edge node per area (ties -> lowest node id); -1 without edges."""
        out = np.full(len(self.areas), -1, dtype=int)
        if not self.edge_nodes:
            return out
        h = self.edge_distances
        for u in range(len(self.areas)):
            best = min(range(len(self.edge_nodes)), key=lambda e: (h[u, e], self.edge_nodes[e].id))
            out[u] = best
        return out

    def latency_requirements(self) -> np.ndarray:
        return np.array([s.latency_requirement for s in self.services], dtype=float)

    def with_latency_requirements(self, requirements: Mapping[str, float]) -> "Scenario":
        """Copy of the scenario with ``l_p`` replaced for the listed services."""
        unknown = set(requirements) - {s.id for s in self.services}
        if unknown:
            raise InputError(f"latency requirements for unknown services: {sorted(unknown)}")
        services = tuple(
            replace(s, latency_requirement=float(requirements[s.id])) if s.id in requirements else s
            for s in self.services
        )
        return replace(self, services=services)

    def restrict_edges(self, eips: Sequence[str]) -> "Scenario":
        """Copy that keeps only the edge nodes owned by ``eips``."""
        keep = tuple(e for e in self.edge_nodes if e.owner_eip in set(eips))
        return replace(self, edge_nodes=keep)


@dataclass(frozen=True)
class Allocation:
    """The four fraction tensors of one slot.

    ``alpha``/``beta`` are [area, service, edge]; ``theta_s``/``theta_c`` are
    [area, service, cloud].
    """

    slot: int
    alpha: np.ndarray
    beta: np.ndarray
    theta_s: np.ndarray
    theta_c: np.ndarray

    def __post_init__(self):
        for name in ("alpha", "beta", "theta_s", "theta_c"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 3:
                raise InputError(f"{name} must be a 3-d array")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.alpha.shape != self.beta.shape or self.theta_s.shape != self.theta_c.shape:
            raise InputError("edge/cloud fraction tensors disagree in shape")

    @classmethod
    def all_cloud(cls, slot: int, n_areas: int, n_services: int, n_edges: int, n_clouds: int,
                  cloud: int = 0) -> "Allocation":
        theta = np.zeros((n_areas, n_services, n_clouds))
        theta[:, :, cloud] = 1.0
        zeros = np.zeros((n_areas, n_services, n_edges))
        return cls(slot, zeros, zeros, theta, theta)

    def storage_sums(self) -> np.ndarray:
        return self.alpha.sum(axis=2) + self.theta_s.sum(axis=2)

    def compute_sums(self) -> np.ndarray:
        return self.beta.sum(axis=2) + self.theta_c.sum(axis=2)

    def conservation_error(self) -> float:
        """Largest deviation of a storage or compute fraction sum from 1."""
        if self.alpha.shape[0] * self.alpha.shape[1] == 0:
            return 0.0
        return float(max(np.abs(self.storage_sums() - 1).max(), np.abs(self.compute_sums() - 1).max()))

    def is_conserving(self, tol: float = CONSERVATION_TOL) -> bool:
        return self.conservation_error() <= tol


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: str = "error"

    def __str__(self):
        return f"[{self.severity}] {self.code}: {self.message}"


def validate_scenario(scenario: Scenario) -> list[Violation]:
    """Every violated invariant of ``scenario``; empty iff well-formed."""
    out: list[Violation] = []

    def bad(code, msg, severity="error"):
        out.append(Violation(code, msg, severity))

    n = scenario.time_grid.slot_count
    mode = scenario.coordinate_mode
    if mode not in (PLANAR, GEODETIC):
        bad("coordinate mode", f"unknown coordinate mode {mode!r}")
    if not scenario.distance_scale > 0:
        bad("distance scale", "distance_scale must be positive")
    l1, l2 = scenario.satisfaction_bounds
    if l1 > l2:
        bad("satisfaction bounds", f"l_1={l1} exceeds l_2={l2}")

    for kind, items in (("area", scenario.areas), ("service", scenario.services),
                        ("edge node", scenario.edge_nodes), ("cloud node", scenario.cloud_nodes)):
        ids = [x.id for x in items]
        for dup in sorted({i for i in ids if ids.count(i) > 1}):
            bad("duplicate id", f"{kind} id {dup!r} appears more than once")
        if mode in (PLANAR, GEODETIC) and kind != "service":
            for x in items:
                try:
                    check_location(x.location, mode)
                except InputError as exc:
                    bad("coordinates", f"{kind} {x.id!r}: {exc}")

    if not scenario.cloud_nodes:
        bad("cloud nodes", "at least one cloud node is required")

    pops = [a.population for a in scenario.areas]
    for a in scenario.areas:
        if a.population < 0:
            bad("population", f"area {a.id!r} has negative population")
    if scenario.total_population <= 0:
        bad("population", "total population must be positive")
    elif not math.isclose(sum(pops), scenario.total_population, rel_tol=1e-9, abs_tol=1e-9):
        bad("population", f"area populations sum to {sum(pops)!r}, total_population is {scenario.total_population!r}")

    for s in scenario.services:
        for coef in ("k_s", "k_c", "r_p", "latency_requirement"):
            if not getattr(s, coef) > 0:
                bad("service coefficient", f"service {s.id!r}: {coef} must be positive")
        if len(s.profile) != n:
            bad("profile length", f"service {s.id!r} has profile length {len(s.profile)}, time grid has {n} slots")
        if any(not (0.0 <= q <= 1.0) for q in s.profile):
            bad("profile range", f"service {s.id!r} has profile values outside [0, 1]")

    for e in scenario.edge_nodes:
        for attr in ("storage_capacity", "compute_capacity", "price_storage", "price_compute", "price_comm"):
            if getattr(e, attr) < 0:
                bad("negative value", f"edge node {e.id!r}: {attr} is negative")
    for c in scenario.cloud_nodes:
        for attr in ("storage_capacity", "compute_capacity"):
            if getattr(c, attr) < 0:
                bad("negative value", f"cloud node {c.id!r}: {attr} is negative")
    for attr in ("cloud_storage", "cloud_compute", "cloud_comm"):
        if getattr(scenario.prices, attr) < 0:
            bad("negative value", f"price {attr} is negative")

    service_ids = {s.id for s in scenario.services}
    eips = set(scenario.eips)
    for model_name, table in (("fixed_contract", scenario.contracts.fixed_contract),
                              ("multihoming", scenario.contracts.multihoming)):
        for sid, owners in table.items():
            if sid not in service_ids:
                bad("dangling id", f"{model_name} contract names unknown service {sid!r}")
            for eip in owners:
                if eip not in eips:
                    bad("dangling id", f"{model_name} contract for {sid!r} names unknown EIP {eip!r}")
    for gid, group in scenario.latency_groups.items():
        for sid, value in group.items():
            if sid not in service_ids:
                bad("dangling id", f"latency group {gid!r} names unknown service {sid!r}")
            elif not value > 0:
                bad("service coefficient", f"latency group {gid!r}: requirement for {sid!r} must be positive")

    if not any(v.code in ("profile length", "population") for v in out):
        out.extend(_cloud_peak_warnings(scenario))
    return out


def _cloud_peak_warnings(scenario: Scenario) -> list[Violation]:
    # Peak of the all-cloud offload, summed directly over areas and services.
    if scenario.total_population <= 0 or not scenario.services:
        return []
    profiles = np.array([s.profile for s in scenario.services], dtype=float)  # [P, T]
    k_c = np.array([s.k_c for s in scenario.services])
    storage_peak = float((scenario.total_population * profiles).sum(axis=0).max())
    compute_peak = float((scenario.total_population * profiles * k_c[:, None]).sum(axis=0).max())
    out = []
    s_cap = sum(c.storage_capacity for c in scenario.cloud_nodes)
    c_cap = sum(c.compute_capacity for c in scenario.cloud_nodes)
    if s_cap < storage_peak * (1 - 1e-12):
        out.append(Violation("cloud capacity below peak",
                             f"total cloud storage {s_cap:g} < peak all-cloud storage demand {storage_peak:g}",
                             "warning"))
    if c_cap < compute_peak * (1 - 1e-12):
        out.append(Violation("cloud capacity below peak",
                             f"total cloud compute {c_cap:g} < peak all-cloud compute demand {compute_peak:g}",
                             "warning"))
    return out


def resolve_latency_group(scenario: Scenario, group: str) -> dict[str, float]:
    """``l_p`` values for a latency group: scenario-defined first, then the built-in table."""
    from .groups import TABLE_GROUPS

    if str(group) in scenario.latency_groups:
        return {k: float(v) for k, v in scenario.latency_groups[str(group)].items()}
    table = TABLE_GROUPS.get(str(group))
    if table is None:
        raise InputError(f"unknown latency group {group!r}")
    out = {}
    for s in scenario.services:
        key = s.name.lower()
        if key not in table:
            raise InputError(f"latency group {group!r} has no requirement for service {s.name!r}")
        out[s.id] = table[key]
    return out
