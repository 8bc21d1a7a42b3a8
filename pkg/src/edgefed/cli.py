"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 scenario
validation failure, 3 infeasible slot with --abort-on-infeasible.

Every option can also be set through an ``EDGEFED_<OPTION>`` environment
variable (e.g. ``EDGEFED_SOLVER=highs``, ``EDGEFED_OUT=results``); command
line flags win.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .demand import generate_demand, parse_predictor
from .groups import GROUP_IDS
from .lp.simplex import RevisedSimplex
from .lp.solvers import make_solver
from .model import InputError, Scenario, resolve_latency_group, validate_scenario
from .reporting import (SavingsReport, atomic_write, emit_cost_table, emit_timeseries, output_name,
                        summary_json, write_report)
from .scenario_file import load_scenario
from .scheduler import MODELS, SPLIT_RULES, DemandSource, InfeasibleSlot, compare_models

log = logging.getLogger("edgefed")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3
COMMANDS = ("validate", "run", "compare", "sweep")
ENV_PREFIX = "EDGEFED_"
MONOTONE_TOL = 1e-7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    env = os.environ.get

    def flag(name):
        return env(ENV_PREFIX + name, "").strip().lower() in ("1", "true", "yes", "on")

    p = _Parser(prog="edgefed", description="Edge federation provisioning simulator.")
    p.add_argument("--scenario", default=env(ENV_PREFIX + "SCENARIO"),
                   help="scenario YAML file or bundled name (unit4, toronto30, toronto50)")
    p.add_argument("--command", choices=COMMANDS, default=env(ENV_PREFIX + "COMMAND", "validate"))
    p.add_argument("--models", default=env(ENV_PREFIX + "MODELS"),
                   help=f"comma-separated subset of {','.join(MODELS)}")
    p.add_argument("--predictor", default=env(ENV_PREFIX + "PREDICTOR", "oracle"),
                   help="oracle, seasonal[:period] or moving:w")
    p.add_argument("--groups", default=env(ENV_PREFIX + "GROUPS"),
                   help="comma-separated latency group ids (standard groups 1..7 or scenario-defined)")
    p.add_argument("--latency", action="append", default=None, metavar="SERVICE=VALUE",
                   help="custom latency requirement; repeat per service (forms the group 'custom')")
    seed = env(ENV_PREFIX + "SEED")
    p.add_argument("--seed", type=int, default=int(seed) if seed else None,
                   help="seed for scenarios with a synthetic block")
    p.add_argument("--out", default=env(ENV_PREFIX + "OUT", "edgefed-out"))
    p.add_argument("--solver", default=env(ENV_PREFIX + "SOLVER", "bundled"),
                   help="bundled, bundled:bland, highs or external:PATH")
    p.add_argument("--split", choices=SPLIT_RULES, default=env(ENV_PREFIX + "SPLIT", "equal"),
                   help="multihoming demand split rule")
    p.add_argument("--feasibility-tol", type=float, default=float(env(ENV_PREFIX + "FEASIBILITY_TOL", "1e-7")))
    p.add_argument("--optimality-tol", type=float, default=float(env(ENV_PREFIX + "OPTIMALITY_TOL", "1e-7")))
    p.add_argument("--abort-on-infeasible", action="store_true", default=flag("ABORT_ON_INFEASIBLE"))
    p.add_argument("--resolve-on-violation", action="store_true", default=flag("RESOLVE_ON_VIOLATION"))
    p.add_argument("-v", "--verbose", action="store_true", default=flag("VERBOSE"))
    return p


def _solver(args):
    if args.solver in ("bundled", "bundled:dantzig", "bundled:bland"):
        base = make_solver(args.solver)
        return RevisedSimplex(pricing=base.pricing, feasibility_tol=args.feasibility_tol,
                              optimality_tol=args.optimality_tol)
    return make_solver(args.solver)


def _models(args) -> list[str]:
    if not args.models:
        return ["federation"] if args.command == "run" else list(MODELS)
    chosen = [m.strip() for m in args.models.split(",") if m.strip()]
    unknown = [m for m in chosen if m not in MODELS]
    if unknown:
        raise InputError(f"unknown model(s) {unknown}; use {','.join(MODELS)}")
    return chosen


def _groups(args, scenario: Scenario, default_all: bool) -> list[tuple[Optional[str], Scenario]]:
    out = []
    if args.groups:
        ids = [g.strip() for g in args.groups.split(",") if g.strip()]
    else:
        ids = list(GROUP_IDS) if default_all and not args.latency else []
    for g in ids:
        out.append((g, scenario.with_latency_requirements(resolve_latency_group(scenario, g))))
    if args.latency:
        custom = {}
        for item in args.latency:
            sid, sep, value = item.partition("=")
            if not sep:
                raise InputError(f"--latency expects SERVICE=VALUE, got {item!r}")
            custom[sid.strip()] = float(value)
        out.append(("custom", scenario.with_latency_requirements(custom)))
    return out or [(None, scenario)]


def _load(args) -> Scenario:
    if not args.scenario:
        raise InputError("--scenario is required")
    return load_scenario(args.scenario, seed=args.seed)


def _check(scenario: Scenario) -> bool:
    problems = validate_scenario(scenario)
    for v in problems:
        print(f"{v.severity}: {v}")
    return not any(v.severity == "error" for v in problems)


def cmd_validate(args) -> int:
    scenario = _load(args)
    ok = _check(scenario)
    print(f"{scenario.name}: {'valid' if ok else 'INVALID'}")
    return EXIT_OK if ok else EXIT_INVALID


def _compare(args, scenario: Scenario, group: Optional[str], models: Sequence[str]) -> SavingsReport:
    demand = generate_demand(scenario)
    predictor = parse_predictor(args.predictor, scenario.time_grid.slot_count)
    return compare_models(scenario, DemandSource.periodic(demand), predictor, _solver(args), models=models,
                          split=args.split, group=group, abort_on_infeasible=args.abort_on_infeasible,
                          resolve_on_violation=args.resolve_on_violation)


def _prefix(scenario: Scenario, group: Optional[str]) -> str:
    return scenario.name if group is None else f"{scenario.name}-g{group}"


def _print_report(rep: SavingsReport):
    label = f"group {rep.group}" if rep.group is not None else "scenario requirements"
    print(f"[{rep.scenario.name}, {label}]")
    for m, total in rep.totals.items():
        note = f" ({len(rep.timelines[m].infeasible)} infeasible slots)" if rep.timelines[m].infeasible else ""
        print(f"  {m:15s} total cost {total:.12g}{note}")
    for b, v in rep.savings.items():
        print(f"  savings vs {b}: {'n/a' if v is None else format(v, '.6f')}")
    for f in rep.flags:
        print(f"  flag: {f}")


def cmd_run(args) -> int:
    scenario = _load(args)
    if not _check(scenario):
        return EXIT_INVALID
    models = _models(args)
    for group, scen in _groups(args, scenario, default_all=False):
        rep = _compare(args, scen, group, models)
        prefix = _prefix(scen, group)
        for m in models:
            sub = SavingsReport(**{**rep.__dict__, "timelines": {m: rep.timelines[m]},
                                   "utilization": {m: rep.utilization[m]}})
            for metric in ("average_cost", "utilization"):
                atomic_write(Path(args.out) / output_name(prefix, m, metric), emit_timeseries(sub, metric).to_csv())
        atomic_write(Path(args.out) / output_name(prefix, "all", "summary", "json"),
                     summary_json(rep, predictor=args.predictor))
        _print_report(rep)
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load(args)
    if not _check(scenario):
        return EXIT_INVALID
    models = _models(args)
    for group, scen in _groups(args, scenario, default_all=False):
        rep = _compare(args, scen, group, models)
        write_report(rep, args.out, _prefix(scen, group))
        _print_report(rep)
    return EXIT_OK


def monotonicity(reports: Sequence[SavingsReport], tol: float = MONOTONE_TOL) -> dict[str, bool]:
    """Cost and edge utilization non-decreasing over the groups, per model."""
    standard = sorted((r for r in reports if r.group in GROUP_IDS), key=lambda r: int(r.group))
    verdict = {}
    if not standard:
        return verdict
    for m in standard[0].timelines:
        if any(r.timelines[m].infeasible for r in standard):
            continue
        costs = [r.totals[m] for r in standard]
        util = [r.edge_utilization(m) for r in standard]
        verdict[f"{m}/cost"] = all(b >= a - tol * max(1.0, abs(a)) for a, b in zip(costs, costs[1:]))
        verdict[f"{m}/edge_utilization"] = all(b >= a - tol for a, b in zip(util, util[1:]))
    return verdict


def cmd_sweep(args) -> int:
    scenario = _load(args)
    if not _check(scenario):
        return EXIT_INVALID
    models = _models(args)
    reports = []
    for group, scen in _groups(args, scenario, default_all=True):
        rep = _compare(args, scen, group, models)
        write_report(rep, args.out, _prefix(scen, group))
        _print_report(rep)
        reports.append(rep)
    verdict = monotonicity(reports)
    out = Path(args.out)
    atomic_write(out / output_name(scenario.name, "sweep", "cost"), emit_cost_table(reports).to_csv())
    atomic_write(out / output_name(scenario.name, "sweep", "summary", "json"),
                 summary_json(reports, monotonicity={k: "PASS" if v else "FAIL" for k, v in verdict.items()}))
    for k, v in verdict.items():
        print(f"monotonicity {k}: {'PASS' if v else 'FAIL'}")
    return EXIT_OK


HANDLERS = {"validate": cmd_validate, "run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return HANDLERS[args.command](args)
    except InfeasibleSlot as exc:
        print(f"edgefed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InputError as exc:
        print(f"edgefed: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
