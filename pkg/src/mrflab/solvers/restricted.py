"""Decision procedures for the restricted (clique) and multicommodity variants."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from ..instances import MrfMInstance, MrfRInstance, PathFlow
from .columns import Demand, PathFlowLP, PathLpResult, Robustness
from .limits import Limits
from .robust import Decision


def _emit(dump, lp_model: PathFlowLP) -> None:
    if dump is not None:
        dump(lp_model._base_lp(deficit=False))


def decide_mrf_r_star(instance: MrfRInstance, limits: Limits | None = None, dump=None) -> Decision:
    """Is there a flow of value theta losing at most k - 1 to every clique failure?

    Integral instances are handed to the enumerative procedure.
    """
    if instance.integral:
        from .integral import decide_integral_mrf_r_star
        return decide_integral_mrf_r_star(instance, limits)
    target = Fraction(instance.k - 1)
    if instance.theta == 0:
        return Decision(True, PathFlow(), Fraction(0), {"threshold": target})
    model = PathFlowLP(instance.graph, [Demand("flow", instance.source, instance.sink, instance.theta)],
                       Robustness(instance.k, instance.compat), limits=limits, single=True)
    res = model.solve(target)
    _emit(dump, model)
    return _decision(res, target)


def decide_mrf_m_star(instance: MrfMInstance, limits: Limits | None = None, dump=None) -> Decision:
    """Is there a multicommodity flow meeting all demands with loss at most kM - 1 for every |S| <= k?"""
    target = instance.k * instance.M - 1
    model = PathFlowLP(instance.graph, commodity_demands(instance), Robustness(instance.k),
                       limits=limits)
    res = model.solve(target)
    _emit(dump, model)
    return _decision(res, target)


def _decision(res: PathLpResult, target: Fraction) -> Decision:
    info = {"threshold": target, "columns": res.columns, "rows": res.rows}
    if not res.feasible:
        info["reason"] = "demand infeasible"
        return Decision(False, None, None, info)
    if res.worst_loss is None:
        info["reason"] = "loss bound exceeded"
        return Decision(False, None, res.value, info)
    return Decision(True, res.flow, res.worst_loss, info)


def commodity_demands(instance: MrfMInstance) -> list[Demand]:
    return [Demand(c.id, c.source, c.sink, c.demand) for c in instance.commodities]


def multicommodity_flow(instance: MrfMInstance, arc_cost: Mapping | None = None,
                        limits: Limits | None = None) -> PathFlow | None:
    """A basic optimal flow meeting every demand for a nonnegative arc cost, or None if none exists."""
    res = PathFlowLP(instance.graph, commodity_demands(instance), arc_cost=arc_cost or {},
                     limits=limits).solve()
    return res.flow if res.feasible else None
