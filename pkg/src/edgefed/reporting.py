"""Savings reports and their CSV/JSON serializations.

Numbers are written with 12 significant digits. Savings and utilization
are fractions (0.233, not 23.3). Savings in the cost table are derived from
the totals as printed, so they can be recomputed from the file itself.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .cost import Utilization, average_cost, eip_costs, utilization
from .demand import DemandSet
from .groups import GROUP_IDS
from .model import Allocation, InputError, Scenario

if TYPE_CHECKING:
    from .scheduler import ScheduleTimeline

FEDERATION, MULTIHOMING, FIXED_CONTRACT = "federation", "multihoming", "fixed_contract"
MODEL_ORDER = (FEDERATION, MULTIHOMING, FIXED_CONTRACT)
BASELINES = (FIXED_CONTRACT, MULTIHOMING)
METRICS = ("average_cost", "cost_saving", "utilization")
REDIRECT_MIN = 1e-9


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return ""
    if v == 0:
        return "0"
    return format(v, ".12g")


def saving(baseline: float, federation: float) -> float:
    return (baseline - federation) / baseline if baseline else 0.0


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple[str, ...]] = field(default_factory=list)
    notes: tuple[str, ...] = ()

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(tuple(fmt(v) for v in values))

    def column(self, name: str) -> list[str]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def records(self) -> list[dict[str, str]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for note in self.notes:
            buf.write(f"# {note}\r\n")
        # CRLF terminators (RFC 4180) make the writer quote any field holding \r or \n.
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        lines = io.StringIO(text, newline="").readlines()
        notes = []
        while lines and lines[0].startswith("# "):
            notes.append(lines.pop(0)[2:].rstrip("\r\n"))
        parsed = list(csv.reader(lines))
        if not parsed:
            raise InputError("empty table")
        return cls(tuple(parsed[0]), [tuple(r) for r in parsed[1:]], tuple(notes))


@dataclass
class SavingsReport:
    scenario: Scenario
    group: Optional[str]
    timelines: dict[str, "ScheduleTimeline"]
    totals: dict[str, float]
    slot_costs: dict[str, np.ndarray]
    savings: dict[str, Optional[float]]
    eip_totals: dict[str, dict[str, float]]
    eip_savings: dict[str, dict[str, float]]
    satisfaction: dict[str, dict[str, float]]
    utilization: dict[str, list[Optional[Utilization]]]
    flags: list[str] = field(default_factory=list)

    @property
    def latency(self) -> dict[str, float]:
        return {s.id: s.latency_requirement for s in self.scenario.services}

    def eip_savings_range(self, baseline: str) -> Optional[tuple[float, float]]:
        vals = list(self.eip_savings.get(baseline, {}).values())
        return (min(vals), max(vals)) if vals else None

    def edge_utilization(self, model: str) -> float:
        """Horizon edge utilization: used over available, storage and compute averaged."""
        tl = self.timelines[model]
        used_s = used_c = 0.0
        for t, alloc in enumerate(tl.allocations):
            if alloc is None:
                continue
            d = tl.actual.slot(t)
            used_s += float(np.einsum("up,upe->", d.s, alloc.alpha))
            used_c += float(np.einsum("up,upe->", d.c, alloc.beta))
        n = tl.slot_count
        cap_s = n * sum(e.storage_capacity for e in self.scenario.edge_nodes)
        cap_c = n * sum(e.compute_capacity for e in self.scenario.edge_nodes)
        ratios = [u / c for u, c in ((used_s, cap_s), (used_c, cap_c)) if c > 0]
        return float(np.mean(ratios)) if ratios else 0.0

    def to_dict(self) -> dict:
        def r(v):
            return None if v is None or (isinstance(v, float) and math.isnan(v)) else float(fmt(v) or 0)

        return {
            "scenario": self.scenario.name,
            "group": self.group,
            "latency_requirements": {k: r(v) for k, v in self.latency.items()},
            "totals": {m: r(v) for m, v in self.totals.items()},
            "savings": {f"vs_{b}": r(v) for b, v in self.savings.items()},
            "eip_totals": {m: {e: r(v) for e, v in d.items()} for m, d in self.eip_totals.items()},
            "eip_savings": {f"vs_{b}": {e: r(v) for e, v in d.items()} for b, d in self.eip_savings.items()},
            "satisfaction": {m: {s: r(v) for s, v in d.items()} for m, d in self.satisfaction.items()},
            "edge_utilization": {m: r(self.edge_utilization(m)) for m in self.timelines},
            "infeasible_slots": {m: sorted(tl.infeasible) for m, tl in self.timelines.items()},
            "flags": list(self.flags),
        }


def build_report(scenario: Scenario, timelines: Mapping[str, "ScheduleTimeline"],
                 group: Optional[str] = None) -> SavingsReport:
    flags: list[str] = []
    ordered = {m: timelines[m] for m in MODEL_ORDER if m in timelines}
    ordered.update({m: tl for m, tl in timelines.items() if m not in ordered})
    totals = {m: tl.total_cost for m, tl in ordered.items()}
    for m, tl in ordered.items():
        if tl.infeasible:
            flags.append(f"{m}: {len(tl.infeasible)} infeasible slot(s) {sorted(tl.infeasible)}")

    eip_totals: dict[str, dict[str, float]] = {}
    for m, tl in ordered.items():
        acc = {e: 0.0 for e in scenario.eips}
        for t, alloc in enumerate(tl.allocations):
            if alloc is not None:
                for e, v in eip_costs(alloc, tl.actual.slot(t), scenario).items():
                    acc[e] += v
        eip_totals[m] = acc

    savings: dict[str, Optional[float]] = {}
    eip_sav: dict[str, dict[str, float]] = {}
    fed = ordered.get(FEDERATION)
    for b in BASELINES:
        base = ordered.get(b)
        if fed is None or base is None:
            continue
        if fed.infeasible or base.infeasible:
            savings[b] = None
            flags.append(f"savings vs {b} withheld: infeasible slots")
            continue
        savings[b] = saving(totals[b], totals[FEDERATION])
        eip_sav[b] = {e: saving(eip_totals[b][e], eip_totals[FEDERATION][e]) for e in scenario.eips}

    util = {m: [utilization(a, tl.actual.slot(t), scenario) if a is not None else None
                for t, a in enumerate(tl.allocations)] for m, tl in ordered.items()}
    return SavingsReport(
        scenario=scenario, group=group, timelines=dict(ordered), totals=totals,
        slot_costs={m: tl.slot_costs() for m, tl in ordered.items()},
        savings=savings, eip_totals=eip_totals, eip_savings=eip_sav,
        satisfaction={m: tl.satisfaction(scenario) for m, tl in ordered.items()},
        utilization=util, flags=flags,
    )


def _group_key(group: Optional[str]):
    if group in GROUP_IDS:
        return (0, GROUP_IDS.index(group), "")
    return (1, 0, str(group))


def emit_cost_table(reports: Sequence[SavingsReport]) -> Table:
    """One row per (group, model); savings are computed from the printed totals."""
    if not reports:
        raise InputError("no reports to tabulate")
    services = [s.id for s in reports[0].scenario.services]
    table = Table(("group", "model", "total_cost", "savings_vs_fixed", "savings_vs_multihoming")
                  + tuple(f"latency_{s}" for s in services),
                  notes=("savings are fractions of the baseline total (0.1 = 10%)",))
    by_group = {}
    for rep in reports:
        key = rep.group if rep.group is not None else "custom"
        if key in by_group:
            raise InputError(f"duplicate report for group {key!r}")
        by_group[key] = rep
    standard = [g for g in GROUP_IDS if g in by_group]
    if standard:
        last = int(standard[-1])
        missing = [g for g in GROUP_IDS if int(g) <= last and g not in by_group]
        if missing:
            table.notes += (f"missing groups: {', '.join(missing)}",)

    for key in sorted(by_group, key=_group_key):
        rep = by_group[key]
        printed = {m: float(fmt(v)) if fmt(v) else float("nan") for m, v in rep.totals.items()}
        sv = {}
        for b in BASELINES:
            ok = rep.savings.get(b) is not None and FEDERATION in printed
            sv[b] = saving(printed[b], printed[FEDERATION]) if ok else None
        lat = [rep.latency[s] for s in services]
        for m in rep.timelines:
            total = rep.totals[m] if not rep.timelines[m].infeasible else None
            own = (sv[FIXED_CONTRACT], sv[MULTIHOMING]) if m == FEDERATION else (None, None)
            table.add(key, m, total, *own, *lat)
    return table


def emit_timeseries(report: SavingsReport, metric: str, service: Optional[str] = None) -> Table:
    """Per-slot series; ``service`` limits the average-cost metric to one service."""
    if metric not in METRICS:
        raise InputError(f"unknown metric {metric!r}; use one of {METRICS}")
    scen = report.scenario
    table = Table(("slot", "series", "value"))
    n = scen.time_grid.slot_count
    if metric == "average_cost":
        table.notes = ("per-area edge storage and compute cost of each EIP",)
        ps = range(len(scen.services)) if service is None else [scen.service_index(service)]
        for m, tl in report.timelines.items():
            for eip in scen.eips:
                for t in range(n):
                    a = tl.allocations[t]
                    v = sum(average_cost(a, tl.actual.slot(t), scen, eip, p) for p in ps) if a is not None else None
                    table.add(t, f"{m}/{eip}", v)
    elif metric == "cost_saving":
        table.notes = ("saving of the federation over the baseline, as a fraction of the baseline cost",)
        fed = report.timelines.get(FEDERATION)
        for b in BASELINES:
            base = report.timelines.get(b)
            if fed is None or base is None:
                continue
            for eip in scen.eips + ("total",):
                for t in range(n):
                    fa, ba = fed.allocations[t], base.allocations[t]
                    if fa is None or ba is None:
                        table.add(t, f"{b}/{eip}", None)
                        continue
                    d = fed.actual.slot(t)
                    if eip == "total":
                        fv, bv = fed.realized[t].total, base.realized[t].total
                    else:
                        fv, bv = eip_costs(fa, d, scen)[eip], eip_costs(ba, d, scen)[eip]
                    table.add(t, f"{b}/{eip}", saving(bv, fv))
    else:
        table.notes = ("used over available capacity, storage and compute averaged",)
        for m, series in report.utilization.items():
            for part in ("edge", "cloud"):
                for t in range(n):
                    u = series[t]
                    table.add(t, f"{m}/{part}", getattr(u, part) if u is not None else None)
    return table


def emit_redirect_table(allocation: Allocation, scenario: Scenario, demand) -> Table:
    """Weighted redirect targets (node:fraction) per (area, service) with demand."""
    d = demand.slot(allocation.slot) if isinstance(demand, DemandSet) else demand
    edge_ids = [e.id for e in scenario.edge_nodes]
    cloud_ids = [a.id for a in scenario.cloud_nodes]
    table = Table(("area", "service", "storage_targets", "compute_targets"),
                  notes=(f"slot {allocation.slot}; fractions of each row's demand",))

    def targets(edge_fr, cloud_fr):
        pairs = list(zip(edge_ids, edge_fr)) + list(zip(cloud_ids, cloud_fr))
        return ";".join(f"{node}:{fmt(f)}" for node, f in pairs if f > REDIRECT_MIN)

    for u, area in enumerate(scenario.areas):
        for p, svc in enumerate(scenario.services):
            if d.s[u, p] <= 0 and d.c[u, p] <= 0:
                continue
            table.add(area.id, svc.id, targets(allocation.alpha[u, p], allocation.theta_s[u, p]),
                      targets(allocation.beta[u, p], allocation.theta_c[u, p]))
    return table


def parse_targets(cell: str) -> dict[str, float]:
    out = {}
    for item in filter(None, cell.split(";")):
        node, _, value = item.rpartition(":")
        out[node] = float(value)
    return out


def atomic_write(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def output_name(scenario: str, model: str, metric: str, ext: str = "csv") -> str:
    return f"{scenario}_{model}_{metric}.{ext}"


def write_report(report: SavingsReport, out_dir: Union[str, Path], prefix: Optional[str] = None) -> list[Path]:
    """Cost table, the three time series and the JSON summary of one report."""
    name = prefix or report.scenario.name
    written = [atomic_write(Path(out_dir) / output_name(name, "all", "cost"), emit_cost_table([report]).to_csv())]
    for metric in METRICS:
        written.append(atomic_write(Path(out_dir) / output_name(name, "all", metric),
                                    emit_timeseries(report, metric).to_csv()))
    written.append(atomic_write(Path(out_dir) / output_name(name, "all", "summary", "json"), summary_json(report)))
    return written


def summary_json(report_or_reports: Union[SavingsReport, Iterable[SavingsReport]], **extra) -> str:
    if isinstance(report_or_reports, SavingsReport):
        body = report_or_reports.to_dict()
    else:
        body = {"reports": [r.to_dict() for r in report_or_reports]}
    body.update(extra)
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
