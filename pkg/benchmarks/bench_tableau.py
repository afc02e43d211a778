"""Time the GMP tableau against the pure-Python one on the same exact LPs.

    python3 benchmarks/bench_tableau.py [--repeat N]

Each program is solved by every available backend; the optimal values
must coincide, and the best wall time of ``--repeat`` runs is reported.
"""

from __future__ import annotations

import argparse
import random
import time
from itertools import combinations

from mrflab.instances import enumerate_st_paths, interdictable_arcs
from mrflab.lp import LinearProgram, available_backends, solve_lp
from mrflab.oracles import UndirectedGraph, independent_sets
from mrflab.reductions import reduce_coloring_to_mrfr


def coloring_lp(graph: UndirectedGraph) -> LinearProgram:
    sets = independent_sets(graph)
    lp = LinearProgram("min")
    for i in range(len(sets)):
        lp.add_variable(i)
    for v in graph.vertices:
        lp.add_constraint({i: 1 for i, s in enumerate(sets) if v in s}, "==", 1)
    lp.set_objective({i: 1 for i in range(len(sets))})
    return lp


def robust_lp(graph, source, sink, k: int) -> LinearProgram:
    """Full path-by-scenario program, no row generation."""
    paths = enumerate_st_paths(graph, source, sink)
    lp = LinearProgram("max")
    for i in range(len(paths)):
        lp.add_variable(i)
    lp.add_variable("lam", 0, None)
    for a in graph.arcs:
        lp.add_constraint({i: 1 for i, p in enumerate(paths) if a.id in p}, "<=", a.capacity)
    for s in combinations(interdictable_arcs(graph), k):
        row = {i: 1 for i, p in enumerate(paths) if not set(s).isdisjoint(p.arcs)}
        row["lam"] = -1
        lp.add_constraint(row, "<=", 0)
    lp.set_objective({**{i: 1 for i in range(len(paths))}, "lam": -1})
    return lp


def programs():
    rng = random.Random(1)
    out = []
    for n in (9, 11):
        edges = [e for e in combinations(range(n), 2) if rng.random() < 0.4]
        out.append((f"chi_f random n={n}", coloring_lp(UndirectedGraph(range(n), edges))))
    chain = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3).instance
    out.append(("robust 27 paths k=2", robust_lp(chain.graph, chain.source, chain.sink, 2)))
    c5 = reduce_coloring_to_mrfr(UndirectedGraph.cycle(5), 3).instance
    out.append(("robust 243 paths k=1", robust_lp(c5.graph, c5.source, c5.sink, 1)))
    return out


def best_time(lp, backend, repeat):
    best, value = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        sol = solve_lp(lp, backend)
        best = min(best, time.perf_counter() - start)
        value = sol.value
    return best, value


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = available_backends()
    print(f"{'program':<24}" + "".join(f"{b:>12}" for b in backends) + "     speedup  value")
    for name, lp in programs():
        times, values = [], set()
        for b in backends:
            t, v = best_time(lp, b, args.repeat)
            times.append(t)
            values.add(v)
        assert len(values) == 1, f"{name}: backends disagree {values}"
        speed = f"{times[-1] / times[0]:>11.1f}x" if len(times) > 1 else f"{'-':>12}"
        print(f"{name:<24}" + "".join(f"{t:>11.3f}s" for t in times) + speed + f"  {values.pop()}")


if __name__ == "__main__":
    main()
