"""Reduction outputs, fractional colorings and a small graph builder."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Hashable, Mapping

from ..errors import ValidationError
from ..instances import Arc, Digraph, id_key
from ..lp.model import as_fraction

NODE = "node"
ARC = "arc"
COMMODITY = "commodity"


def _freeze(d: Mapping) -> Mapping:
    return MappingProxyType(dict(d))


@dataclass(frozen=True)
class ReductionArtifact:
    """An output instance plus where every element came from.

    ``provenance`` maps ``(kind, id)`` with kind in ``node``, ``arc``,
    ``commodity`` to a role description.  ``parameters`` holds the derived
    constants and the lookup tables the witness maps need.  ``origin`` is
    the input the construction was applied to.
    """
    kind: str
    instance: object
    origin: object
    provenance: Mapping = field(default_factory=dict)
    parameters: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "provenance", _freeze(self.provenance))
        object.__setattr__(self, "parameters", _freeze(self.parameters))

    def role(self, kind: str, element: Hashable) -> str:
        return self.provenance[(kind, element)]

    def untagged(self) -> list[tuple]:
        """Output elements missing from the provenance table (empty when total)."""
        out = []
        inst = self.instance
        for v in inst.graph.nodes:
            if (NODE, v) not in self.provenance:
                out.append((NODE, v))
        for a in inst.graph.arcs:
            if (ARC, a.id) not in self.provenance:
                out.append((ARC, a.id))
        for c in getattr(inst, "commodities", ()):
            if (COMMODITY, c.id) not in self.provenance:
                out.append((COMMODITY, c.id))
        return out

    def provenance_table(self) -> list[dict]:
        rows = [{"kind": k, "id": e, "role": r} for (k, e), r in self.provenance.items()]
        order = {NODE: 0, ARC: 1, COMMODITY: 2}
        rows.sort(key=lambda r: (order[r["kind"]], id_key(r["id"])))
        return rows


class FractionalColoring(Mapping):
    """Weights on independent sets: every vertex is covered with total weight one."""

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping | None = None):
        w = {}
        for s, v in (weights or {}).items():
            v = as_fraction(v)
            if v < 0:
                raise ValidationError("negative color weight")
            if v:
                key = frozenset(s)
                w[key] = w.get(key, Fraction(0)) + v
        self._w = {s: w[s] for s in sorted(w, key=lambda s: (len(s), sorted(map(id_key, s))))}

    def __getitem__(self, s):
        return self._w[frozenset(s)]

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __repr__(self):
        return f"FractionalColoring({self._w!r})"

    def total(self) -> Fraction:
        return sum(self._w.values(), Fraction(0))

    def problems(self, graph) -> list[str]:
        """Invariant violations with respect to an undirected graph."""
        out = []
        known = set(graph.vertices)
        for s in self._w:
            if not s:
                out.append("empty set carries weight")
            if not s <= known:
                out.append(f"set {sorted(s, key=id_key)!r} has unknown vertices")
            elif not graph.is_independent(s):
                out.append(f"set {sorted(s, key=id_key)!r} is not independent")
        for v in graph.vertices:
            cover = sum((w for s, w in self._w.items() if v in s), Fraction(0))
            if cover != 1:
                out.append(f"vertex {v!r} covered {cover} times")
        return out


class GraphBuilder:
    """Collects nodes and arcs with provenance, handing out unused ids."""

    def __init__(self, reserved=()):
        self.nodes: list = []
        self.arcs: list[Arc] = []
        self.provenance: dict = {}
        self._node_ids: set = set()
        self._arc_ids: set = set()
        self._reserved = set(reserved)

    def _fresh(self, name, taken: set):
        candidate = name
        while candidate in taken or candidate in self._reserved:
            candidate = f"{candidate}'"
        return candidate

    def node(self, name, role: str, exact: bool = False):
        """Add a node; ``exact`` keeps the given id and insists it is new."""
        if exact:
            if name in self._node_ids:
                raise ValidationError(f"node {name!r} added twice")
            nid = name
        else:
            nid = self._fresh(name, self._node_ids)
        self._node_ids.add(nid)
        self.nodes.append(nid)
        self.provenance[(NODE, nid)] = role
        return nid

    def arc(self, name, tail, head, capacity=1, role: str = "", immune: bool = False,
            exact: bool = False):
        if exact:
            if name in self._arc_ids:
                raise ValidationError(f"arc {name!r} added twice")
            aid = name
        else:
            aid = self._fresh(name, self._arc_ids)
        self._arc_ids.add(aid)
        self.arcs.append(Arc(aid, tail, head, capacity, immune))
        self.provenance[(ARC, aid)] = role
        return aid

    def digraph(self) -> Digraph:
        return Digraph(tuple(self.nodes), tuple(self.arcs))


def require_integer(value, what: str) -> int:
    value = as_fraction(value)
    if value.denominator != 1:
        raise ValidationError(f"{what} must be an integer, got {value}")
    return int(value)
