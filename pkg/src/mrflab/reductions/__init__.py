"""Instance transformations with forward and backward witness maps."""

from .artifact import FractionalColoring, GraphBuilder, ReductionArtifact
from .clique_interdiction import (flow_from_interdiction_set, interdiction_problems,
                                  interdiction_set_from_flow, reduce_clique_interdiction)
from .coloring import coloring_from_flow, flow_from_coloring, reduce_coloring_to_mrfr
from .multicommodity import (PropertyReport, PropertyResult, check_properties, denormalized_flow,
                             hat_flow, mrfm_flow_from_mrfr, mrfr_flow_from_mrfm, normalize_mrfr,
                             normalized_flow, reduce_mrfr_to_mrfm)
from .pipeline import StageResult, mrfr_to_mrf, stage_decisions
from .wagner import (combine_clique_flow, matchingize_compat, pad_budget, parity_union,
                     saturate_demand, wagner_union)
from .wrapper import (base_flow, contract_flow, expand_flow, expand_immune, lift_flow,
                      project_flow, reduce_mrfm_to_mrf)

__all__ = [
    "FractionalColoring", "GraphBuilder", "PropertyReport", "PropertyResult", "ReductionArtifact",
    "StageResult", "base_flow", "check_properties", "coloring_from_flow", "combine_clique_flow",
    "contract_flow", "denormalized_flow", "expand_flow", "expand_immune", "flow_from_coloring",
    "flow_from_interdiction_set", "hat_flow", "interdiction_problems",
    "interdiction_set_from_flow", "lift_flow", "matchingize_compat", "mrfm_flow_from_mrfr",
    "mrfr_flow_from_mrfm", "mrfr_to_mrf", "normalize_mrfr", "normalized_flow", "pad_budget",
    "parity_union", "project_flow", "reduce_clique_interdiction", "reduce_coloring_to_mrfr",
    "reduce_mrfm_to_mrf", "reduce_mrfr_to_mrfm", "saturate_demand", "stage_decisions",
    "wagner_union",
]
