"""Exact solvers and decision procedures."""

from .columns import Demand, PathFlowLP, PathLpResult, Robustness
from .integral import decide_integral_mrf_r_star, solve_integral_mrf
from .limits import Limits
from .maxflow import max_flow, max_flow_arcs, min_cut
from .restricted import decide_mrf_m_star, decide_mrf_r_star, multicommodity_flow
from .robust import (Decision, MrfSolution, RniSolution, best_response, decide_mrf_star,
                     decide_rni_star, rni_violations, solve_mrf, solve_mrf_k1, solve_rni)

__all__ = [
    "Decision", "Demand", "Limits", "MrfSolution", "PathFlowLP", "PathLpResult", "RniSolution",
    "Robustness", "best_response", "decide_integral_mrf_r_star", "decide_mrf_m_star",
    "decide_mrf_r_star", "decide_mrf_star", "decide_rni_star", "max_flow", "max_flow_arcs",
    "min_cut", "multicommodity_flow", "rni_violations", "solve_integral_mrf", "solve_mrf",
    "solve_mrf_k1", "solve_rni",
]
