"""Scenario documents: one YAML file per scenario, units spelled out in the keys.

Layout::

    name: unit4
    coordinate_mode: planar            # or geodetic: [lat, lon] in degrees
    distance_scale_latency_units_per_distance_unit: 1.0
    total_population: 100
    satisfaction_bounds: [0.99, 1.0]
    time_grid: {slot_count: 24, slot_length_hours: 1.0}
    prices:
      cloud_storage_price_per_unit: 1.0
      cloud_compute_price_per_unit: 0.5
      cloud_comm_price_per_unit: 0.2
    areas:
      - {id: a0, location: [0, 0], population: 60}
    services:
      - id: web
        name: Web
        k_s_post_per_storage: 0.5
        k_c_compute_per_storage: 1.0
        r_p_latency_per_compute_load: 1.0
        latency_requirement_units: 40
        profile: [0.2, 0.5, ...]           # or trace: file.csv (+ trace_start)
    edge_nodes:
      - id: e0
        owner_eip: A
        location: [1, 0]
        storage_capacity_units_per_slot: 50
        compute_capacity_units_per_slot: 50
        storage_price_per_unit: 3
        compute_price_per_unit: 1.5
        comm_price_per_unit: 0.5
    cloud_nodes:
      - {id: c0, location: [30, 0], storage_capacity_units_per_slot: 500,
         compute_capacity_units_per_slot: 500}
    contracts:
      fixed_contract: {web: [A]}
      multihoming: {web: [A, B]}
    latency_groups: {"1": {web: 40}}

Instead of the explicit network a document may hold a ``synthetic`` block,
e.g. ``synthetic: {generator: toronto, edge_nodes: 30, seed: 7}``, expanded
with :func:`edgefed.synthetic.toronto_scenario`.

Trace paths are resolved relative to the scenario file.
"""
from __future__ import annotations

from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .demand import ingest_trace, normalize_profile
from .model import (PLANAR, CloudNode, Contracts, EdgeNode, InputError, PriceBook, Scenario, Service, TimeGrid,
                    UserArea)

BUNDLED = ("unit4", "toronto30", "toronto50")

SERVICE_KEYS = {
    "k_s": "k_s_post_per_storage",
    "k_c": "k_c_compute_per_storage",
    "r_p": "r_p_latency_per_compute_load",
    "latency_requirement": "latency_requirement_units",
}
EDGE_KEYS = {
    "storage_capacity": "storage_capacity_units_per_slot",
    "compute_capacity": "compute_capacity_units_per_slot",
    "price_storage": "storage_price_per_unit",
    "price_compute": "compute_price_per_unit",
    "price_comm": "comm_price_per_unit",
}
CLOUD_KEYS = {
    "storage_capacity": "storage_capacity_units_per_slot",
    "compute_capacity": "compute_capacity_units_per_slot",
}
PRICE_KEYS = {
    "cloud_storage": "cloud_storage_price_per_unit",
    "cloud_compute": "cloud_compute_price_per_unit",
    "cloud_comm": "cloud_comm_price_per_unit",
}
SCALE_KEY = "distance_scale_latency_units_per_distance_unit"


def _get(doc: Mapping, key: str, where: str, default: Any = ...):
    if not isinstance(doc, Mapping):
        raise InputError(f"{where or 'document'}: expected a mapping")
    if key not in doc:
        if default is ...:
            raise InputError(f"missing key '{where + '.' if where else ''}{key}'")
        return default
    return doc[key]


def _num(doc: Mapping, key: str, where: str, default: Any = ...) -> float:
    value = _get(doc, key, where, default)
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}.{key}: expected a number, got {value!r}") from exc


def _list(doc: Mapping, key: str) -> list:
    value = _get(doc, key, "")
    if not isinstance(value, list):
        raise InputError(f"{key}: expected a list")
    return value


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise InputError(f"no bundled scenario {name!r}; available: {', '.join(BUNDLED)}")
    return Path(str(resources.files("edgefed") / "scenarios" / f"{name}.yaml"))


def resolve_path(spec: Union[str, Path]) -> Path:
    """A file path, or the name of a bundled scenario."""
    path = Path(spec)
    if path.exists():
        return path
    if str(spec) in BUNDLED:
        return bundled_path(str(spec))
    raise InputError(f"scenario file not found: {spec}")


def load_scenario(source: Union[str, Path], seed: Optional[int] = None) -> Scenario:
    path = resolve_path(source)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    return scenario_from_dict(doc, base_dir=path.parent, seed=seed)


def scenario_from_dict(doc: Mapping, base_dir: Union[str, Path] = ".", seed: Optional[int] = None) -> Scenario:
    if not isinstance(doc, Mapping):
        raise InputError("scenario document must be a mapping")
    if "synthetic" in doc:
        return _synthetic(doc, seed)

    grid_doc = _get(doc, "time_grid", "")
    grid = TimeGrid(int(_num(grid_doc, "slot_count", "time_grid")),
                    _num(grid_doc, "slot_length_hours", "time_grid", 1.0))
    mode = str(doc.get("coordinate_mode", PLANAR))
    prices_doc = _get(doc, "prices", "")
    prices = PriceBook(**{k: _num(prices_doc, v, "prices") for k, v in PRICE_KEYS.items()})

    areas = tuple(
        UserArea(str(_get(a, "id", f"areas[{i}]")), tuple(_get(a, "location", f"areas[{i}]")),
                 _num(a, "population", f"areas[{i}]"))
        for i, a in enumerate(_list(doc, "areas")))
    base_dir = Path(base_dir)
    services = tuple(_service(s, i, grid, base_dir) for i, s in enumerate(_list(doc, "services")))
    edges = tuple(
        EdgeNode(id=str(_get(e, "id", f"edge_nodes[{i}]")), owner_eip=str(_get(e, "owner_eip", f"edge_nodes[{i}]")),
                 location=tuple(_get(e, "location", f"edge_nodes[{i}]")),
                 **{k: _num(e, v, f"edge_nodes[{i}]") for k, v in EDGE_KEYS.items()})
        for i, e in enumerate(doc.get("edge_nodes") or []))
    clouds = tuple(
        CloudNode(id=str(_get(c, "id", f"cloud_nodes[{i}]")), location=tuple(_get(c, "location", f"cloud_nodes[{i}]")),
                  **{k: _num(c, v, f"cloud_nodes[{i}]") for k, v in CLOUD_KEYS.items()})
        for i, c in enumerate(_list(doc, "cloud_nodes")))

    contracts_doc = doc.get("contracts") or {}
    contracts = Contracts(
        {str(k): tuple(str(e) for e in v) for k, v in (contracts_doc.get("fixed_contract") or {}).items()},
        {str(k): tuple(str(e) for e in v) for k, v in (contracts_doc.get("multihoming") or {}).items()},
    )
    groups = {str(g): {str(s): float(v) for s, v in table.items()}
              for g, table in (doc.get("latency_groups") or {}).items()}
    bounds = tuple(float(v) for v in doc.get("satisfaction_bounds", (0.99, 1.0)))
    if len(bounds) != 2:
        raise InputError("satisfaction_bounds: expected two numbers")
    return Scenario(
        name=str(doc.get("name", "scenario")),
        time_grid=grid, areas=areas, services=services, edge_nodes=edges, cloud_nodes=clouds, prices=prices,
        total_population=_num(doc, "total_population", ""),
        distance_scale=_num(doc, SCALE_KEY, "", 1.0),
        coordinate_mode=mode, contracts=contracts, satisfaction_bounds=bounds, latency_groups=groups,
    )


def _service(doc: Mapping, i: int, grid: TimeGrid, base_dir: Path) -> Service:
    where = f"services[{i}]"
    sid = str(_get(doc, "id", where))
    if "profile" in doc:
        profile = tuple(float(q) for q in doc["profile"])
    elif "trace" in doc:
        path = base_dir / str(doc["trace"])
        try:
            with open(path, encoding="utf-8") as fh:
                trace = ingest_trace(fh, service=doc.get("trace_service", sid))
        except OSError as exc:
            raise InputError(f"{where}: cannot read trace {path}: {exc}") from exc
        start = doc.get("trace_start")
        if isinstance(start, str):
            start = datetime.fromisoformat(start)
        profile = tuple(normalize_profile(trace, grid, start))
    else:
        raise InputError(f"missing key '{where}.profile' (or '{where}.trace')")
    return Service(sid, str(doc.get("name", sid)), profile=profile,
                   **{k: _num(doc, v, where) for k, v in SERVICE_KEYS.items()})


def _synthetic(doc: Mapping, seed: Optional[int]) -> Scenario:
    from .synthetic import toronto_scenario

    params = dict(doc["synthetic"] or {})
    generator = params.pop("generator", "toronto")
    if generator != "toronto":
        raise InputError(f"unknown synthetic generator {generator!r}")
    if seed is not None:
        params["seed"] = seed
    if "name" in doc:
        params.setdefault("name", doc["name"])
    try:
        return toronto_scenario(**params)
    except TypeError as exc:
        raise InputError(f"synthetic: {exc}") from exc


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "coordinate_mode": s.coordinate_mode,
        SCALE_KEY: s.distance_scale,
        "total_population": s.total_population,
        "satisfaction_bounds": list(s.satisfaction_bounds),
        "time_grid": {"slot_count": s.time_grid.slot_count, "slot_length_hours": s.time_grid.slot_length_hours},
        "prices": {v: getattr(s.prices, k) for k, v in PRICE_KEYS.items()},
        "areas": [{"id": a.id, "location": list(a.location), "population": a.population} for a in s.areas],
        "services": [{"id": p.id, "name": p.name, **{v: getattr(p, k) for k, v in SERVICE_KEYS.items()},
                      "profile": list(p.profile)} for p in s.services],
        "edge_nodes": [{"id": e.id, "owner_eip": e.owner_eip, "location": list(e.location),
                        **{v: getattr(e, k) for k, v in EDGE_KEYS.items()}} for e in s.edge_nodes],
        "cloud_nodes": [{"id": c.id, "location": list(c.location), **{v: getattr(c, k) for k, v in CLOUD_KEYS.items()}}
                        for c in s.cloud_nodes],
        "contracts": {"fixed_contract": {k: list(v) for k, v in s.contracts.fixed_contract.items()},
                      "multihoming": {k: list(v) for k, v in s.contracts.multihoming.items()}},
        "latency_groups": {g: dict(t) for g, t in s.latency_groups.items()},
    }


def dump_scenario(s: Scenario, header: str = "") -> str:
    body = yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None, width=110)
    lines = "".join(f"# {ln}\n" for ln in header.splitlines())
    return lines + body
