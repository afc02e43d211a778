"""The full chain from a clique-restricted instance to a plain robust flow instance."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ResourceLimitError, ValidationError
from ..instances import MrfRInstance
from ..solvers import decide_mrf_m_star, decide_mrf_r_star, decide_mrf_star
from ..solvers.limits import Limits
from .artifact import ReductionArtifact
from .multicommodity import check_properties, normalize_mrfr, reduce_mrfr_to_mrfm
from .wrapper import expand_immune, reduce_mrfm_to_mrf

KIND = "mrf_r->mrf"


def mrfr_to_mrf(instance: MrfRInstance, expand: bool = True) -> ReductionArtifact:
    """Normalize, build the multicommodity instance, wrap it and expand immune arcs.

    ``parameters["stages"]`` holds the four intermediate artifacts in order;
    the output instance carries the threshold ``L``.  With ``expand`` off
    the last stage is ``None`` and the output keeps its immune arcs.
    """
    if not isinstance(instance, MrfRInstance):
        raise ValidationError(f"expected an MrfRInstance, got {type(instance).__name__}")
    normalized = normalize_mrfr(instance)
    multi = reduce_mrfr_to_mrfm(normalized)
    report = check_properties(multi)
    if not report.ok:
        bad = "; ".join(f"property {r.number}: {r.detail}" for r in report.failures())
        raise AssertionError("multicommodity instance lacks its guarantees: " + bad)
    wrapped = reduce_mrfm_to_mrf(multi)
    expanded = expand_immune(wrapped) if expand else None
    last = expanded if expand else wrapped
    out = last.instance
    if out.k != instance.k:
        raise AssertionError("budget changed along the chain")
    params = {
        "stages": (normalized, multi, wrapped, expanded),
        "L": out.threshold,
        "k": out.k,
        "M": multi.parameters["M"],
        "Delta": wrapped.parameters["Delta"],
    }
    return ReductionArtifact(KIND, out, instance, dict(last.provenance), params)


@dataclass(frozen=True)
class StageResult:
    stage: str
    answer: bool | None
    detail: str = ""


def stage_decisions(artifact: ReductionArtifact, limits: Limits | None = None) -> list[StageResult]:
    """Decide every stage of a chain artifact; a stage over its limits reports ``None``."""
    if artifact.kind != KIND:
        raise ValidationError(f"expected a {KIND} artifact, got {artifact.kind}")
    normalized, multi = artifact.parameters["stages"][:2]
    runs = [
        ("mrf_r", lambda: decide_mrf_r_star(artifact.origin, limits)),
        ("mrf_r normalized", lambda: decide_mrf_r_star(normalized.instance, limits)),
        ("mrf_m", lambda: decide_mrf_m_star(multi.instance, limits)),
        ("mrf", lambda: decide_mrf_star(artifact.instance, artifact.parameters["L"], limits)),
    ]
    out = []
    for name, run in runs:
        try:
            d = run()
        except ResourceLimitError as exc:
            out.append(StageResult(name, None, str(exc)))
            continue
        out.append(StageResult(name, d.answer, "" if d.value is None else f"value {d.value}"))
    return out
