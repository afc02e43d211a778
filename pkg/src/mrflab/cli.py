"""Command-line entry point: ``mrflab <command> ...``.

Exit status is 0 on success, 2 when an enumeration guard stops a run and
1 for every other failure (bad input, rejected witness, disagreeing stages).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path as FilePath

from . import io
from .errors import MrfLabError, ResourceLimitError, ValidationError
from .instances import (AT_MOST_K, EXACTLY_K, MrfInstance, MrfMInstance, MrfRInstance, PathFlow,
                        flow_violations, witness_problems, worst_case_loss)
from .oracles import clique_interdiction_bruteforce, fractional_chromatic_number
from .reductions import (FractionalColoring, coloring_from_flow, expand_immune,
                         interdiction_problems, interdiction_set_from_flow, normalize_mrfr,
                         reduce_clique_interdiction, reduce_coloring_to_mrfr, reduce_mrfm_to_mrf,
                         reduce_mrfr_to_mrfm)
from .reductions.artifact import ReductionArtifact
from .solvers import decide_mrf_m_star, decide_mrf_r_star, solve_integral_mrf, solve_mrf
from .solvers.limits import Limits


class Failure(Exception):
    """A run that completed but whose outcome is a failure (exit status 1)."""


# -- helpers ---------------------------------------------------------------------

def _read_instance(path: str, strict: bool):
    return io.parse(FilePath(path).read_text(encoding="utf-8"), strict=strict)


def _write(path, text: str) -> None:
    FilePath(path).write_text(text, encoding="utf-8")


def _stem(path: str) -> str:
    return path[:-5] if path.endswith(".json") else path


def _provenance_path(path: str) -> str:
    return _stem(path) + ".provenance.json"


def _limits(args) -> Limits:
    return Limits.from_env().with_(paths=args.path_limit, scenarios=args.scenario_limit)


class _LpDump:
    """Collects LP listings for ``--dump-lp``."""

    def __init__(self, path: str | None):
        self.path = path
        self.listings: list[str] = []

    def __call__(self, lp) -> None:
        if self.path is not None:
            self.listings.append(lp.dump())

    @property
    def hook(self):
        return self if self.path is not None else None

    def flush(self) -> None:
        if self.path is not None:
            _write(self.path, "\n".join(self.listings))


def _answer(yes: bool) -> str:
    return "YES" if yes else "NO"


def _emit_witness(witness, args, out) -> None:
    target = args.witness or _stem(args.file) + ".witness.json"
    _write(target, io.serialize_witness(witness))
    print(f"witness: {target}", file=out)


def _as_mrfr(instance) -> tuple[MrfRInstance, ReductionArtifact | None]:
    if isinstance(instance, MrfRInstance):
        return instance, None
    if isinstance(instance, io.ColoringInstance):
        art = reduce_coloring_to_mrfr(instance.graph, instance.colors)
        return art.instance, art
    if isinstance(instance, io.CliqueInterdictionInstance):
        art = reduce_clique_interdiction(instance.graph, instance.size, instance.budget)
        return art.instance, art
    raise ValidationError(f"a {type(instance).__name__} has no clique-restricted form")


# -- commands --------------------------------------------------------------------

def cmd_solve(args, out) -> int:
    inst = _read_instance(args.file, not args.lenient)
    if not isinstance(inst, MrfInstance):
        raise ValidationError("solve takes a plain robust flow instance; use decide for the others")
    limits = _limits(args)
    dump = _LpDump(args.dump_lp)
    if args.integral:
        sol = solve_integral_mrf(inst, limits)
    else:
        sol = solve_mrf(inst, limits, dump=dump.hook)
    dump.flush()
    print(f"value {io.format_rational(sol.value)}", file=out)
    print(f"worst loss {io.format_rational(sol.worst_loss)}", file=out)
    _emit_witness(sol.flow, args, out)
    return 0


def _decide(inst, threshold, limits, dump):
    """(answer, value, witness) for any variant."""
    if isinstance(inst, MrfInstance):
        L = threshold if threshold is not None else inst.threshold
        if L is None:
            raise ValidationError("no threshold: pass --threshold or put one in the instance")
        sol = solve_mrf(inst, limits, dump=dump)
        yes = sol.value >= L
        return yes, sol.value, sol.flow if yes else None
    if isinstance(inst, MrfRInstance):
        d = decide_mrf_r_star(inst, limits, dump)
        return d.answer, d.value, d.witness
    if isinstance(inst, MrfMInstance):
        d = decide_mrf_m_star(inst, limits, dump)
        return d.answer, d.value, d.witness
    flow_inst, art = _as_mrfr(inst)
    d = decide_mrf_r_star(flow_inst, limits, dump)
    if not d.answer:
        return False, None, None
    if isinstance(inst, io.ColoringInstance):
        witness = coloring_from_flow(art, d.witness)
        return True, witness.total(), witness
    return True, None, interdiction_set_from_flow(art, d.witness)


def _witness_report(inst, witness, threshold) -> tuple[list[str], str]:
    """Problems with a witness file, plus a one-line summary."""
    if isinstance(inst, io.ColoringInstance):
        if not isinstance(witness, FractionalColoring):
            return ["expected a fractional coloring"], ""
        problems = witness.problems(inst.graph)
        if witness.total() > inst.colors:
            problems.append(f"uses {witness.total()} > {inst.colors} colors")
        return problems, f"colors {io.format_rational(witness.total())}"
    if isinstance(inst, io.CliqueInterdictionInstance):
        if not isinstance(witness, frozenset):
            return ["expected a vertex set"], ""
        return interdiction_problems(inst.graph, inst.size, inst.budget, witness), \
            f"removes {len(witness)} vertices"
    if not isinstance(witness, PathFlow):
        return ["expected a path flow"], ""
    if isinstance(inst, MrfInstance):
        if threshold is None and inst.threshold is None:
            problems = [f"{v.kind} {v.element!r}: {v.detail}"
                        for v in flow_violations(witness, inst, require_demand=False)]
        else:
            problems = witness_problems(inst, witness, threshold)
        if problems:
            return problems, ""
        worst, _ = worst_case_loss(witness, inst.graph, inst.k, EXACTLY_K)
        return [], f"robust value {io.format_rational(witness.value() - worst)}"
    problems = witness_problems(inst, witness)
    if problems:
        return problems, ""
    compat = inst.compat if isinstance(inst, MrfRInstance) else None
    worst, _ = worst_case_loss(witness, inst.graph, inst.k, AT_MOST_K, compat)
    return [], f"worst loss {io.format_rational(worst)}"


def cmd_decide(args, out) -> int:
    inst = _read_instance(args.file, not args.lenient)
    threshold = None if args.threshold is None else io.parse_rational(args.threshold, "--threshold",
                                                                         strict=False)
    if args.check_witness:
        witness = io.parse_witness(FilePath(args.check_witness).read_text(encoding="utf-8"),
                                   strict=not args.lenient)
        problems, summary = _witness_report(inst, witness, threshold)
        if problems:
            for p in problems:
                print(f"rejected: {p}", file=out)
            raise Failure("witness does not certify the instance")
        print(f"witness valid ({summary})" if summary else "witness valid", file=out)
        return 0
    dump = _LpDump(args.dump_lp)
    yes, value, witness = _decide(inst, threshold, _limits(args), dump.hook)
    dump.flush()
    print(_answer(yes), file=out)
    if value is not None:
        if isinstance(inst, (MrfRInstance, MrfMInstance)):
            label = "worst loss"
        elif isinstance(inst, io.ColoringInstance):
            label = "colors"
        else:
            label = "value"
        print(f"{label} {io.format_rational(value)}", file=out)
    if witness is not None:
        _emit_witness(witness, args, out)
    return 0


def _write_stage(path: str, art: ReductionArtifact | None, inst, out) -> None:
    _write(path, io.serialize(inst))
    line = f"wrote {path}"
    if art is not None:
        _write(_provenance_path(path), io.serialize_provenance(art))
        line += f" and {_provenance_path(path)}"
    print(line, file=out)


def _wrap(multi_art_or_inst, keep_immune: bool, out):
    wrapped = reduce_mrfm_to_mrf(multi_art_or_inst)
    if keep_immune:
        return wrapped
    try:
        return expand_immune(wrapped)
    except ResourceLimitError as exc:
        print(f"note: immune arcs kept ({exc})", file=out)
        return wrapped


def cmd_reduce(args, out) -> int:
    inst = _read_instance(args.file, not args.lenient)
    if isinstance(inst, MrfMInstance):
        if args.to != "mrf":
            raise ValidationError("a multicommodity instance only reduces --to mrf")
        art = _wrap(inst, args.keep_immune, out)
        _write_stage(args.out, art, art.instance, out)
        print(f"threshold {io.format_rational(art.instance.threshold)}", file=out)
        return 0
    flow_inst, first = _as_mrfr(inst)
    if flow_inst.integral:
        raise ValidationError("integral instances are outside the multicommodity construction")
    multi = reduce_mrfr_to_mrfm(normalize_mrfr(flow_inst))
    if args.to == "mrfm":
        _write_stage(args.out, multi, multi.instance, out)
        return 0
    final = _wrap(multi, args.keep_immune, out)
    if args.to == "mrf":
        _write_stage(args.out, final, final.instance, out)
    else:
        base = _stem(args.out)
        _write_stage(base + ".mrf_r.json", first, flow_inst, out)
        _write_stage(base + ".mrf_m.json", multi, multi.instance, out)
        _write_stage(base + ".mrf.json", final, final.instance, out)
    print(f"threshold {io.format_rational(final.instance.threshold)}", file=out)
    return 0


def _stage(name: str, run, limits_hit: list, out):
    try:
        yes = run()
    except ResourceLimitError as exc:
        limits_hit.append(name)
        print(f"{name}: undecided ({exc})", file=out, flush=True)
        return None
    print(f"{name}: {_answer(yes)}", file=out, flush=True)
    return yes


def cmd_verify(args, out) -> int:
    """Decide every stage between the input and a plain robust flow instance."""
    inst = _read_instance(args.file, not args.lenient)
    limits = _limits(args)
    dump = _LpDump(args.dump_lp)
    hit: list = []
    answers = []

    def run(name, fn):
        answers.append(_stage(name, fn, hit, out))

    if isinstance(inst, io.ColoringInstance):
        run("chi_f oracle", lambda: fractional_chromatic_number(inst.graph)[0] <= inst.colors)
    if isinstance(inst, io.CliqueInterdictionInstance):
        run("brute force", lambda: clique_interdiction_bruteforce(inst.graph, inst.size, inst.budget)[0])
    if isinstance(inst, MrfInstance):
        run("mrf", lambda: _decide(inst, None, limits, dump.hook)[0])
    elif isinstance(inst, MrfMInstance):
        run("mrf_m", lambda: decide_mrf_m_star(inst, limits, dump.hook).answer)
        wrapped = reduce_mrfm_to_mrf(inst)
        run("mrf", lambda: _decide(wrapped.instance, None, limits, dump.hook)[0])
    else:
        flow_inst, _ = _as_mrfr(inst)
        run("mrf_r", lambda: decide_mrf_r_star(flow_inst, limits, dump.hook).answer)
        if not flow_inst.integral:
            normalized = normalize_mrfr(flow_inst)
            run("mrf_r normalized", lambda: decide_mrf_r_star(normalized.instance, limits).answer)
            multi = reduce_mrfr_to_mrfm(normalized)
            run("mrf_m", lambda: decide_mrf_m_star(multi.instance, limits, dump.hook).answer)
            wrapped = reduce_mrfm_to_mrf(multi)
            run("mrf", lambda: _decide(wrapped.instance, None, limits, dump.hook)[0])
    dump.flush()
    decided = {a for a in answers if a is not None}
    if len(decided) > 1:
        print("stages disagree", file=out)
        raise Failure("stage decisions disagree")
    if hit:
        print(f"stages agree where decided; {len(hit)} undecided", file=out)
        raise ResourceLimitError("stages left undecided by the guards", len(hit))
    print("all stages agree", file=out)
    return 0


def cmd_oracle(args, out) -> int:
    inst = _read_instance(args.file, not args.lenient)
    if not isinstance(inst, (io.ColoringInstance, io.CliqueInterdictionInstance)):
        raise ValidationError("oracles take a coloring or clique_interdiction document")
    if args.oracle == "chif":
        value, coloring = fractional_chromatic_number(inst.graph)
        print(f"chi_f {io.format_rational(value)}", file=out)
        if isinstance(inst, io.ColoringInstance):
            print(f"at most {inst.colors}: {_answer(value <= inst.colors)}", file=out)
        for s, w in FractionalColoring(coloring).items():
            print(f"  {io.format_rational(w)} x {sorted(s, key=io.id_key)}", file=out)
        return 0
    if not isinstance(inst, io.CliqueInterdictionInstance):
        raise ValidationError("clique-interdiction needs a clique_interdiction document")
    yes, chosen = clique_interdiction_bruteforce(inst.graph, inst.size, inst.budget)
    print(_answer(yes), file=out)
    if yes:
        print(f"removed {list(chosen)}", file=out)
    return 0


def cmd_gen(args, out) -> int:
    text = args.spec
    if not text.lstrip().startswith("{"):
        text = FilePath(text).read_text(encoding="utf-8")
    inst = io.generate(io.GeneratorSpec.from_json(text))
    _write(args.out, io.serialize(inst))
    print(f"wrote {args.out}", file=out)
    return 0


# -- parser ----------------------------------------------------------------------

def _global_flags(parser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--dump-lp", metavar="FILE", default=default,
                        help="write every LP the solvers build to FILE")
    parser.add_argument("--path-limit", metavar="N", type=int, default=default,
                        help="cap on enumerated paths (default from MRFLAB_PATH_LIMIT)")
    parser.add_argument("--scenario-limit", metavar="N", type=int, default=default,
                        help="cap on enumerated failure scenarios (default from MRFLAB_SCENARIO_LIMIT)")
    parser.add_argument("--lenient", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="accept rationals not in lowest terms and reduce them")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrflab",
                                     description="Exact robust flow solvers and reductions.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = command("solve", cmd_solve, "optimal robust flow value and flow")
    p.add_argument("file")
    p.add_argument("--witness", metavar="FILE", help="where to write the flow")
    p.add_argument("--integral", action="store_true", help="restrict to integral flows")

    p = command("decide", cmd_decide, "YES/NO with a witness")
    p.add_argument("file")
    p.add_argument("--threshold", metavar="P/Q", help="threshold for plain instances")
    p.add_argument("--witness", metavar="FILE", help="where to write the witness")
    p.add_argument("--check-witness", metavar="FILE", help="validate a witness file instead of solving")

    p = command("reduce", cmd_reduce, "apply the reduction chain")
    p.add_argument("file")
    p.add_argument("--to", choices=("mrfm", "mrf", "full"), required=True)
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--keep-immune", action="store_true", help="do not expand immune arcs")

    p = command("verify", cmd_verify, "decide every stage of the chain and compare")
    p.add_argument("file")

    p = command("oracle", cmd_oracle, "independent brute-force oracles")
    p.add_argument("oracle", choices=("chif", "clique-interdiction"))
    p.add_argument("file")

    p = command("gen", cmd_gen, "generate an instance from a seeded spec")
    p.add_argument("--spec", required=True, metavar="JSON", help="spec file or inline JSON")
    p.add_argument("--out", required=True, metavar="FILE")
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ResourceLimitError as exc:
        print(f"mrflab: resource limit: {exc}", file=sys.stderr)
        return 2
    except Failure as exc:
        print(f"mrflab: {exc}", file=sys.stderr)
        return 1
    except (MrfLabError, ValueError, OSError) as exc:
        print(f"mrflab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
