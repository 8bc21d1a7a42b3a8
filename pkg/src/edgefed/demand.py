"""Service demand: synthetic generation, trace ingestion and prediction."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .model import InputError, Scenario, TimeGrid


class TraceParseError(InputError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class DemandTriple:
    s: float
    s_post: float
    c: float


@dataclass(frozen=True)
class SlotDemand:
    """Demand of a single slot, each array shaped [area, service]."""

    s: np.ndarray
    s_post: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("s", "s_post", "c"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_storage(cls, s: np.ndarray, k_s: np.ndarray, k_c: np.ndarray) -> "SlotDemand":
        s = np.asarray(s, dtype=float)
        return cls(s, s * k_s, s * k_c)

    def scaled(self, factor: Union[float, np.ndarray]) -> "SlotDemand":
        return SlotDemand(self.s * factor, self.s_post * factor, self.c * factor)

    @property
    def is_zero(self) -> bool:
        return not (self.s.any() or self.c.any())


@dataclass(frozen=True)
class DemandSet:
    """Demand tensors shaped [area, service, slot]; slot index 0 is the first slot."""

    s: np.ndarray
    s_post: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("s", "s_post", "c"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 3:
                raise InputError(f"demand tensor {name} must be 3-d")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def slot_count(self) -> int:
        return self.s.shape[2]

    def triple(self, area: int, service: int, slot: int) -> DemandTriple:
        return DemandTriple(float(self.s[area, service, slot]), float(self.s_post[area, service, slot]),
                            float(self.c[area, service, slot]))

    def slot(self, t: int) -> SlotDemand:
        return SlotDemand(self.s[:, :, t], self.s_post[:, :, t], self.c[:, :, t])

    def scaled(self, factor: float) -> "DemandSet":
        return DemandSet(self.s * factor, self.s_post * factor, self.c * factor)

    @classmethod
    def from_slots(cls, slots: Sequence[SlotDemand]) -> "DemandSet":
        return cls(np.stack([d.s for d in slots], axis=2), np.stack([d.s_post for d in slots], axis=2),
                   np.stack([d.c for d in slots], axis=2))


def service_coefficients(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    k_s = np.array([s.k_s for s in scenario.services], dtype=float)
    k_c = np.array([s.k_c for s in scenario.services], dtype=float)
    return k_s, k_c


def generate_demand(scenario: Scenario) -> DemandSet:
    """Population-proportional demand: ``S[u,p,t] = N q_p(t) pop_u / sum(pop)`` with N the total population."""
    pops = np.array([a.population for a in scenario.areas], dtype=float)
    if scenario.total_population <= 0 or pops.sum() <= 0:
        raise InputError("demand generation needs a positive total population")
    n = scenario.time_grid.slot_count
    for svc in scenario.services:
        if len(svc.profile) != n:
            raise InputError(f"service {svc.id!r}: profile length {len(svc.profile)} != {n} slots")
    q = np.array([svc.profile for svc in scenario.services], dtype=float).reshape(len(scenario.services), n)
    share = pops / pops.sum()
    s = scenario.total_population * share[:, None, None] * q[None, :, :]
    k_s, k_c = service_coefficients(scenario)
    return DemandSet(s, s * k_s[None, :, None], s * k_c[None, :, None])


def edge_local_demand(demand: DemandSet, scenario: Scenario, node_id: str, service_id: str, slot: int) -> float:
    """d_ep(t): storage demand of the areas in the node's nearest-node catchment."""
    e = scenario.edge_index(node_id)
    p = scenario.service_index(service_id)
    members = scenario.catchment == e
    return float(demand.s[members, p, slot].sum())


@dataclass(frozen=True)
class TrafficProfile:
    service: str
    timestamps: tuple[datetime, ...] = ()
    values: tuple[float, ...] = ()

    def __len__(self):
        return len(self.values)


def _parse_rows(stream: Union[TextIO, str]) -> list[tuple[int, datetime, str, float]]:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceParseError(1, "missing header `timestamp,service,value`") from None
    if [h.strip().lower() for h in header] != ["timestamp", "service", "value"]:
        raise TraceParseError(1, f"expected header `timestamp,service,value`, got {','.join(header)!r}")
    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise TraceParseError(line, f"expected 3 fields, got {len(row)}")
        ts_text, service, value_text = (cell.strip() for cell in row)
        try:
            ts = datetime.fromisoformat(ts_text.replace("Z", "+00:00"))
        except ValueError:
            raise TraceParseError(line, f"bad ISO-8601 timestamp {ts_text!r}") from None
        try:
            value = float(value_text)
        except ValueError:
            raise TraceParseError(line, f"bad value {value_text!r}") from None
        if not np.isfinite(value):
            raise TraceParseError(line, f"non-finite value {value_text!r}")
        if value < 0:
            raise InputError(f"line {line}: negative value {value!r}")
        rows.append((line, ts, service, value))
    return rows


def _build_profile(service: str, rows) -> TrafficProfile:
    rows = sorted(rows, key=lambda r: r[1])
    for prev, cur in zip(rows, rows[1:]):
        if cur[1] == prev[1]:
            raise InputError(f"line {cur[0]}: duplicate timestamp {cur[1].isoformat()} for {service!r}")
    return TrafficProfile(service, tuple(r[1] for r in rows), tuple(r[3] for r in rows))


def ingest_traces(stream: Union[TextIO, str]) -> dict[str, TrafficProfile]:
    """All services of a ``timestamp,service,value`` CSV, one profile each."""
    by_service: dict[str, list] = {}
    for row in _parse_rows(stream):
        by_service.setdefault(row[2], []).append(row)
    return {name: _build_profile(name, rows) for name, rows in by_service.items()}


def ingest_trace(stream: Union[TextIO, str], service: Optional[str] = None) -> TrafficProfile:
    """Parse a single-service trace (or pick ``service`` out of a mixed one)."""
    profiles = ingest_traces(stream)
    if service is not None:
        return profiles.get(service, TrafficProfile(service))
    if not profiles:
        return TrafficProfile("")
    if len(profiles) > 1:
        raise InputError(f"trace holds several services {sorted(profiles)}; pick one")
    return next(iter(profiles.values()))


def normalize_profile(profile: TrafficProfile, grid: TimeGrid, start: Optional[datetime] = None) -> list[float]:
    """Resample to the slot grid (mean within slot) and divide by the maximum.

    Slots without observations take the nearest earlier slot's mean (the first
    observed slot's mean if none is earlier); observations past the grid are
    dropped.
    """
    if not profile.values:
        raise InputError("cannot normalize an empty profile")
    start = start or profile.timestamps[0]
    width = timedelta(hours=grid.slot_length_hours)
    sums = np.zeros(grid.slot_count)
    counts = np.zeros(grid.slot_count)
    for ts, value in zip(profile.timestamps, profile.values):
        k = int((ts - start) // width)
        if 0 <= k < grid.slot_count:
            sums[k] += value
            counts[k] += 1
    if not counts.any():
        raise InputError("no observations fall inside the slot grid")
    means = np.full(grid.slot_count, np.nan)
    means[counts > 0] = sums[counts > 0] / counts[counts > 0]
    first = means[counts > 0][0]
    last = first
    for k in range(grid.slot_count):
        if np.isnan(means[k]):
            means[k] = last
        last = means[k]
    peak = means.max()
    if peak <= 0:
        return [0.0] * grid.slot_count
    return [float(v) for v in means / peak]


@dataclass(frozen=True)
class Prediction:
    values: np.ndarray  # [horizon, ...]
    fallback: bool = False
    note: str = ""


@dataclass(frozen=True)
class SeasonalNaive:
    """Value observed at the same phase one period earlier."""

    period: int = 24
    name: str = field(default="seasonal", init=False)

    def predict(self, history: np.ndarray, horizon: int) -> Prediction:
        history = _check_history(history)
        if len(history) < self.period:
            last = np.repeat(history[-1:], horizon, axis=0)
            return Prediction(last, True, f"history {len(history)} < period {self.period}: last value used")
        cycle = history[-self.period:]
        idx = [h % self.period for h in range(horizon)]
        return Prediction(cycle[idx])


@dataclass(frozen=True)
class MovingAverage:
    """Trailing mean of the last ``window`` observations, held flat over the horizon."""

    window: int = 3
    name: str = field(default="moving", init=False)

    def __post_init__(self):
        if self.window < 1:
            raise InputError("moving-average window must be >= 1")

    def predict(self, history: np.ndarray, horizon: int) -> Prediction:
        history = _check_history(history)
        short = len(history) < self.window
        mean = history[-self.window:].mean(axis=0)
        note = f"history {len(history)} < window {self.window}: mean of all" if short else ""
        return Prediction(np.repeat(mean[None], horizon, axis=0), short, note)


def _check_history(history) -> np.ndarray:
    history = np.asarray(history, dtype=float)
    if history.ndim == 0 or len(history) < 1:
        raise InputError("prediction needs at least one observation")
    return history


def predict_demand(history: Iterable, horizon: int, strategy=None) -> Prediction:
    """Forecast ``horizon`` steps from ``history`` (leading axis = time)."""
    if horizon < 1:
        raise InputError("horizon must be >= 1")
    strategy = strategy or SeasonalNaive()
    return strategy.predict(np.asarray(list(history) if not isinstance(history, np.ndarray) else history,
                                       dtype=float), horizon)


def parse_predictor(text: str, period: int = 24):
    """``oracle`` -> None, ``seasonal[:period]``, ``moving:w``."""
    text = text.strip().lower()
    if text == "oracle":
        return None
    kind, _, arg = text.partition(":")
    try:
        if kind == "seasonal":
            return SeasonalNaive(int(arg) if arg else period)
        if kind == "moving":
            return MovingAverage(int(arg) if arg else 3)
    except ValueError:
        pass
    raise InputError(f"unknown predictor {text!r}; use oracle, seasonal[:period] or moving:w")
