from .assemble import DEFAULT_LATENCY_MARGIN, SlotOptions, assemble_lp, assemble_slot_lp
from .problem import EQ, INFEASIBLE, KINDS, LE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, VariableIndex
from .simplex import BLAND, DANTZIG, RevisedSimplex, SimplexError
from .audit import FAMILIES, allocation_from_solution, audit_allocation, audit_solution
from .mps import write_mps
from .solvers import ExternalSolver, HighsSolver, make_solver

__all__ = [
    "DEFAULT_LATENCY_MARGIN", "SlotOptions", "assemble_lp", "assemble_slot_lp",
    "EQ", "INFEASIBLE", "KINDS", "LE", "OPTIMAL", "UNBOUNDED", "LinearProgram", "LpSolution", "VariableIndex",
    "BLAND", "DANTZIG", "RevisedSimplex", "SimplexError",
    "FAMILIES", "allocation_from_solution", "audit_allocation", "audit_solution",
    "write_mps", "ExternalSolver", "HighsSolver", "make_solver",
]
