"""Linear program container types and the column layout of the provisioning LP."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

KINDS = ("alpha", "beta", "theta_s", "theta_c")
LE, EQ = "L", "E"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class VariableIndex:
    """Bijection between (kind, area, service, node, slot) and LP columns.

    Each kind occupies one contiguous block. Inside a kind the columns form a
    stack of [area x node] matrices, one per (slot, service) pair, stacked in
    the order ``l = n_services * slot_pos + service``.
    """

    n_areas: int
    n_services: int
    n_edges: int
    n_clouds: int
    slots: tuple[int, ...] = (0,)

    def nodes(self, kind: str) -> int:
        return self.n_edges if kind in ("alpha", "beta") else self.n_clouds

    def kind_size(self, kind: str) -> int:
        return len(self.slots) * self.n_services * self.n_areas * self.nodes(kind)

    def offset(self, kind: str) -> int:
        out = 0
        for k in KINDS:
            if k == kind:
                return out
            out += self.kind_size(k)
        raise KeyError(kind)

    @property
    def n_columns(self) -> int:
        return sum(self.kind_size(k) for k in KINDS)

    def slot_pos(self, slot: int) -> int:
        return self.slots.index(slot)

    def column(self, kind: str, area: int, service: int, node: int, slot: Optional[int] = None) -> int:
        pos = 0 if slot is None else self.slot_pos(slot)
        n = self.nodes(kind)
        if not (0 <= area < self.n_areas and 0 <= service < self.n_services and 0 <= node < n):
            raise IndexError((kind, area, service, node, slot))
        block = pos * self.n_services + service
        return self.offset(kind) + (block * self.n_areas + area) * n + node

    def decode(self, col: int) -> tuple[str, int, int, int, int]:
        if not 0 <= col < self.n_columns:
            raise IndexError(col)
        for kind in KINDS:
            size = self.kind_size(kind)
            if col < size:
                n = self.nodes(kind)
                block, rest = divmod(col, self.n_areas * n)
                area, node = divmod(rest, n)
                pos, service = divmod(block, self.n_services)
                return kind, area, service, node, self.slots[pos]
            col -= size
        raise AssertionError("unreachable")

    def block(self, kind: str, slot: Optional[int] = None) -> slice:
        """Columns of one kind and slot, reshapeable to [service, area, node]."""
        pos = 0 if slot is None else self.slot_pos(slot)
        width = self.n_services * self.n_areas * self.nodes(kind)
        start = self.offset(kind) + pos * width
        return slice(start, start + width)

    def tensor(self, x: np.ndarray, kind: str, slot: Optional[int] = None) -> np.ndarray:
        """Column values of one kind as an [area, service, node] tensor."""
        vals = np.asarray(x)[self.block(kind, slot)]
        return vals.reshape(self.n_services, self.n_areas, self.nodes(kind)).transpose(1, 0, 2)


@dataclass
class LinearProgram:
    """``min c.x  s.t.  A x (<= | =) b,  lower <= x <= upper``."""

    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    index: Optional[VariableIndex] = None
    row_names: Sequence[str] = field(default_factory=list)
    col_names: Sequence[str] = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.sense = np.asarray(self.sense, dtype="<U1")
        self.b = np.asarray(self.b, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        m, n = self.A.shape
        if self.c.shape != (n,) or self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("column vectors disagree with the constraint matrix")
        if self.b.shape != (m,) or self.sense.shape != (m,):
            raise ValueError("row vectors disagree with the constraint matrix")
        if not set(self.sense.tolist()) <= {LE, EQ}:
            raise ValueError("row sense must be 'L' or 'E'")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def row_family(self, i: int) -> str:
        return self.row_names[i].split("[", 1)[0] if self.row_names else str(i)

    def violations(self, x: np.ndarray) -> dict[str, float]:
        """Largest algebraic violation of bounds and of each row kind."""
        x = np.asarray(x, dtype=float)
        ax = self.A @ x
        le = self.sense == LE
        row_le = float(np.max(ax[le] - self.b[le], initial=0.0))
        row_eq = float(np.max(np.abs(ax[~le] - self.b[~le]), initial=0.0))
        bounds = float(max(np.max(self.lower - x, initial=0.0), np.max(x - self.upper, initial=0.0)))
        return {"bounds": max(bounds, 0.0), "rows_le": max(row_le, 0.0), "rows_eq": row_eq}


@dataclass(frozen=True)
class LpSolution:
    status: str
    objective_value: float
    x: np.ndarray
    iterations: int = 0
    certificate_row: Optional[int] = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL
