"""Exact rational linear programming with primal/dual certificates."""

from .backend import BACKEND, available_backends, tableau_class
from .model import (INFEASIBLE, OPTIMAL, UNBOUNDED, Constraint, LinearProgram,
                    LpSolution, primal_violations, verify_solution)
from .simplex import SimplexEngine, solve_lp

__all__ = [
    "BACKEND", "available_backends", "tableau_class",
    "INFEASIBLE", "OPTIMAL", "UNBOUNDED", "Constraint", "LinearProgram",
    "LpSolution", "primal_violations", "verify_solution",
    "SimplexEngine", "solve_lp",
]
