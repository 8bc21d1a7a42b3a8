"""Solver selection: the bundled simplex, scipy's HiGHS, or an external program.

An external solver is any executable called as ``PROGRAM model.mps solution.txt``.
It must write the status word (optimal, infeasible or unbounded) on the
first line of the solution file, followed by ``C<j> value`` lines for the
nonzero columns.
"""
from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from ..model import InputError
from .mps import write_mps
from .problem import EQ, INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution
from .simplex import BLAND, DANTZIG, RevisedSimplex

Solver = Callable[[LinearProgram], LpSolution]


@dataclass(frozen=True)
class HighsSolver:
    name = "highs"

    def __call__(self, lp: LinearProgram) -> LpSolution:
        le = lp.sense != EQ
        kw = {}
        if le.any():
            kw.update(A_ub=lp.A[le], b_ub=lp.b[le])
        if (~le).any():
            kw.update(A_eq=lp.A[~le], b_eq=lp.b[~le])
        res = linprog(lp.c, bounds=np.column_stack([lp.lower, lp.upper]), method="highs", **kw)
        if res.status == 0:
            return LpSolution(OPTIMAL, float(res.fun), np.asarray(res.x), int(res.nit))
        status = {2: INFEASIBLE, 3: UNBOUNDED}.get(res.status)
        if status is None:
            raise RuntimeError(f"highs failed: {res.message}")
        return LpSolution(status, float("nan"), np.zeros(lp.shape[1]), int(res.nit), message=res.message)


@dataclass(frozen=True)
class ExternalSolver:
    program: str
    timeout: float = 600.0
    name = "external"

    def __call__(self, lp: LinearProgram) -> LpSolution:
        with tempfile.TemporaryDirectory() as tmp:
            model, answer = Path(tmp) / "model.mps", Path(tmp) / "solution.txt"
            model.write_text(write_mps(lp))
            proc = subprocess.run([self.program, str(model), str(answer)], capture_output=True, text=True,
                                  timeout=self.timeout)
            if proc.returncode != 0 or not answer.exists():
                raise RuntimeError(f"external solver failed ({proc.returncode}): {proc.stderr.strip()}")
            return read_solution(answer.read_text(), lp)


def read_solution(text: str, lp: LinearProgram) -> LpSolution:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0].lower() not in (OPTIMAL, INFEASIBLE, UNBOUNDED):
        raise RuntimeError("solution file must start with a status word")
    status = lines[0][0].lower()
    x = np.zeros(lp.shape[1])
    for n, parts in enumerate(lines[1:], start=2):
        try:
            x[int(parts[0].lstrip("Cc"))] = float(parts[1])
        except (IndexError, ValueError) as exc:
            raise RuntimeError(f"solution file line {n}: expected 'C<j> value'") from exc
    obj = float(lp.c @ x) if status == OPTIMAL else float("nan")
    return LpSolution(status, obj, x)


def make_solver(spec: str = "bundled") -> Solver:
    """``bundled``, ``bundled:bland``, ``highs`` or ``external:PATH``."""
    if spec in ("bundled", "bundled:dantzig"):
        return RevisedSimplex(pricing=DANTZIG)
    if spec == "bundled:bland":
        return RevisedSimplex(pricing=BLAND)
    if spec == "highs":
        return HighsSolver()
    if spec.startswith("external:") and len(spec) > len("external:"):
        return ExternalSolver(spec.split(":", 1)[1])
    raise InputError(f"unknown solver {spec!r}")
