"""Export of a :class:`LinearProgram` as an MPS document.

Rows are named ``R<i>`` and columns ``C<j>`` so every name fits the classic
eight-character field. Values are written with full ``repr`` precision; most
readers accept this in free or fixed mode since fields stay whitespace
separated.
"""
from __future__ import annotations

import io
from typing import TextIO, Union

import numpy as np

from .problem import EQ, LinearProgram


def _num(v: float) -> str:
    return repr(float(v))


def write_mps(lp: LinearProgram, out: Union[TextIO, None] = None, name: str = "EDGEFED") -> str:
    buf = io.StringIO()
    m, n = lp.shape
    rw = max(8, len(f"R{m}"))
    cw = max(8, len(f"C{n}"))
    buf.write(f"NAME          {name}\n")
    buf.write("ROWS\n")
    buf.write(" N  COST\n")
    for i in range(m):
        buf.write(f" {'E' if lp.sense[i] == EQ else 'L'}  R{i}\n")
    buf.write("COLUMNS\n")
    A = lp.A.tocsc()
    for j in range(n):
        col = f"C{j}".ljust(cw)
        if lp.c[j] != 0:
            buf.write(f"    {col}  {'COST'.ljust(rw)}  {_num(lp.c[j])}\n")
        for k in range(A.indptr[j], A.indptr[j + 1]):
            buf.write(f"    {col}  {f'R{A.indices[k]}'.ljust(rw)}  {_num(A.data[k])}\n")
    buf.write("RHS\n")
    for i in np.flatnonzero(lp.b):
        buf.write(f"    {'RHS'.ljust(cw)}  {f'R{i}'.ljust(rw)}  {_num(lp.b[i])}\n")
    buf.write("BOUNDS\n")
    for j in range(n):
        col = f"C{j}".ljust(cw)
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == hi:
            buf.write(f" FX BND       {col}  {_num(lo)}\n")
            continue
        if lo != 0:
            buf.write(f" LO BND       {col}  {_num(lo)}\n" if np.isfinite(lo) else f" MI BND       {col}\n")
        if np.isfinite(hi):
            buf.write(f" UP BND       {col}  {_num(hi)}\n")
    buf.write("ENDATA\n")
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
