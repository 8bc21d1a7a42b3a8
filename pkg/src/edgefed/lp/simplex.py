"""Bounded-variable revised simplex (two phases) with a Bland anti-cycling fallback."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .problem import EQ, INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution

log = logging.getLogger(__name__)

BLAND = "bland"
DANTZIG = "dantzig"


class SimplexError(RuntimeError):
    pass


@dataclass(frozen=True)
class RevisedSimplex:
    """Deterministic revised simplex over an explicit basis inverse.

    ``pricing="bland"`` picks the lowest-index improving column on every
    pivot. ``pricing="dantzig"`` picks the largest reduced cost and falls back
    to Bland's rule after ``degenerate_limit`` consecutive degenerate pivots,
    until a pivot makes progress again. Leaving-variable ties always go to the
    lowest variable index.
    """

    pricing: str = DANTZIG
    feasibility_tol: float = 1e-7
    optimality_tol: float = 1e-7
    pivot_tol: float = 1e-9
    refactor_every: int = 50
    degenerate_limit: int = 20
    max_iterations: int = 500_000

    name = "bundled"

    def __post_init__(self):
        if self.pricing not in (BLAND, DANTZIG):
            raise ValueError(f"unknown pricing rule {self.pricing!r}")

    def solve(self, lp: LinearProgram) -> LpSolution:
        return _Run(self, lp).solve()

    __call__ = solve


class _Run:
    def __init__(self, opts: RevisedSimplex, lp: LinearProgram):
        self.o = opts
        self.lp = lp
        m, n = lp.shape
        self.m, self.n = m, n
        A = lp.A.tocsc()
        b = lp.b.copy()
        le = lp.sense != EQ

        # Slack for every <= row; artificial for rows the slack cannot start.
        le_rows = np.flatnonzero(le)
        slack = sp.csc_matrix((np.ones(len(le_rows)), (le_rows, np.arange(len(le_rows)))), shape=(m, len(le_rows)))
        # Nonbasic structurals start at their lower bounds.
        resid = b - A @ lp.lower
        needs_art = ~le | (resid < 0)
        art_rows = np.flatnonzero(needs_art)
        art_sign = np.where(resid[art_rows] < 0, -1.0, 1.0)
        art = sp.csc_matrix((art_sign, (art_rows, np.arange(len(art_rows)))), shape=(m, len(art_rows)))

        self.M = sp.hstack([A, slack, art], format="csc")
        self.n_slack = len(le_rows)
        self.first_art = n + self.n_slack
        self.N = self.M.shape[1]
        self.b = b
        self.lo = np.concatenate([lp.lower, np.zeros(self.n_slack + len(art_rows))])
        self.hi = np.concatenate([lp.upper, np.full(self.n_slack + len(art_rows), np.inf)])
        self.art_rows = art_rows

        basis = np.empty(m, dtype=int)
        slack_of_row = np.full(m, -1)
        slack_of_row[le_rows] = n + np.arange(len(le_rows))
        art_of_row = np.full(m, -1)
        art_of_row[art_rows] = self.first_art + np.arange(len(art_rows))
        for i in range(m):
            basis[i] = art_of_row[i] if needs_art[i] else slack_of_row[i]
        self.basis = basis
        self.x = self.lo.copy()
        self.at_upper = np.zeros(self.N, dtype=bool)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0
        self._refactor()

    # -- linear algebra -------------------------------------------------
    def _refactor(self):
        B = self.M[:, self.basis].toarray()
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis") from exc
        nonbasic = ~self.is_basic
        xn = np.where(nonbasic, self.x, 0.0)
        self.x[self.basis] = self.Binv @ (self.b - self.M @ xn)
        self.since_refactor = 0

    def _column(self, j: int) -> np.ndarray:
        start, end = self.M.indptr[j], self.M.indptr[j + 1]
        rows = self.M.indices[start:end]
        return self.Binv[:, rows] @ self.M.data[start:end]

    # -- main loop ---------------------------------------------------------
    def _iterate(self, cost: np.ndarray) -> str:
        o = self.o
        fixed = self.hi - self.lo <= 0
        bland_mode = o.pricing == BLAND
        degenerate_run = 0
        while True:
            if self.iterations >= o.max_iterations:
                raise SimplexError(f"iteration limit {o.max_iterations} reached")
            if self.since_refactor >= o.refactor_every:
                self._refactor()
            y = cost[self.basis] @ self.Binv
            d = cost - self.M.T @ y
            improving = ~self.is_basic & ~fixed & np.where(self.at_upper, d > o.optimality_tol, d < -o.optimality_tol)
            candidates = np.flatnonzero(improving)
            if candidates.size == 0:
                if self.since_refactor:
                    self._refactor()
                    continue
                return OPTIMAL
            if bland_mode or degenerate_run >= o.degenerate_limit:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            direction = -1.0 if self.at_upper[j] else 1.0
            w = self._column(j)
            delta = direction * w
            xb = self.x[self.basis]
            lo_b, hi_b = self.lo[self.basis], self.hi[self.basis]

            t_best = self.hi[j] - self.lo[j]
            leave = -1  # -1 means bound flip of the entering column
            leave_var = j
            dec = np.flatnonzero(delta > o.pivot_tol)
            inc = np.flatnonzero((delta < -o.pivot_tol) & np.isfinite(hi_b))
            ratios = np.concatenate([
                np.maximum(xb[dec] - lo_b[dec], 0.0) / delta[dec],
                np.maximum(hi_b[inc] - xb[inc], 0.0) / -delta[inc],
            ])
            rows = np.concatenate([dec, inc])
            if ratios.size:
                t_min = ratios.min()
                if t_min <= t_best:
                    tied = rows[ratios <= t_min + 1e-12 * max(1.0, t_min)]
                    pick = tied[np.argmin(self.basis[tied])]
                    if not (t_min == t_best and j < self.basis[pick]):
                        t_best = t_min
                        leave = int(pick)
                        leave_var = int(self.basis[pick])
            if not np.isfinite(t_best):
                return UNBOUNDED

            self.x[self.basis] = xb - t_best * delta
            self.iterations += 1
            degenerate_run = degenerate_run + 1 if t_best <= 1e-12 else 0
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                self.x[j] = self.hi[j] if self.at_upper[j] else self.lo[j]
                continue

            entering_value = self.x[j] + direction * t_best
            to_upper = delta[leave] < 0
            self.at_upper[leave_var] = bool(to_upper)
            self.x[leave_var] = self.hi[leave_var] if to_upper else self.lo[leave_var]
            self.is_basic[leave_var] = False
            self.is_basic[j] = True
            self.at_upper[j] = False
            self.basis[leave] = j
            self.x[j] = entering_value

            pivot = w[leave]
            row = self.Binv[leave] / pivot
            self.Binv -= np.outer(w, row)
            self.Binv[leave] = row
            self.since_refactor += 1

    def solve(self) -> LpSolution:
        n = self.n
        if self.first_art < self.N:
            phase1 = np.zeros(self.N)
            phase1[self.first_art:] = 1.0
            status = self._iterate(phase1)
            if status != OPTIMAL:
                raise SimplexError("phase 1 cannot be unbounded")
            infeas = self.x[self.first_art:]
            scale = max(1.0, float(np.abs(self.b).max(initial=0.0)))
            if infeas.sum() > self.o.feasibility_tol * scale:
                worst = int(np.argmax(infeas))
                row = int(self.art_rows[worst])
                log.debug("infeasible LP, residual %.3g at row %d", infeas.sum(), row)
                return LpSolution(INFEASIBLE, float("nan"), self.x[:n].copy(), self.iterations, row,
                                  f"phase 1 residual {infeas.sum():.3g}")
            self.hi[self.first_art:] = 0.0
            self.at_upper[self.first_art:] = False
        cost = np.concatenate([self.lp.c, np.zeros(self.N - n)])
        status = self._iterate(cost)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, float("-inf"), self.x[:n].copy(), self.iterations)
        x = np.clip(self.x[:n], self.lp.lower, self.lp.upper)
        return LpSolution(OPTIMAL, float(self.lp.c @ x), x, self.iterations)
