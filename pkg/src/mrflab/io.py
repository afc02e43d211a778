"""JSON documents for instances and witnesses, plus seeded instance generators.

Rationals travel as strings (``"3"``, ``"1/2"``) so nothing is parsed
through a float.  Serialization sorts every list into a canonical order,
which makes ``serialize(parse(text))`` a normal form of ``text``.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Hashable, Mapping

from .errors import ValidationError
from .instances import (Arc, CompatGraph, Commodity, Digraph, MrfInstance, MrfMInstance,
                        MrfRInstance, Path, PathFlow, id_key)
from .oracles import UndirectedGraph
from .reductions.artifact import FractionalColoring, ReductionArtifact

SCHEMA_VERSION = 1
VARIANTS = ("mrf", "mrf_r", "mrf_m", "coloring", "clique_interdiction")
WITNESS_KINDS = ("path_flow", "fractional_coloring", "vertex_set")
FAMILIES = ("random_dag", "random_compat", "coloring_graph", "clique_graph")

_CANONICAL = re.compile(r"(0|-?[1-9]\d*)(/[1-9]\d*)?")


@dataclass(frozen=True)
class ColoringInstance:
    """Is the fractional chromatic number of ``graph`` at most ``colors``?"""
    graph: UndirectedGraph
    colors: int


@dataclass(frozen=True)
class CliqueInterdictionInstance:
    """Can ``budget`` vertices be removed so no clique of ``size`` vertices survives?"""
    graph: UndirectedGraph
    size: int
    budget: int


# -- scalars ---------------------------------------------------------------------

def format_rational(value) -> str:
    value = Fraction(value)
    return str(value)


def parse_rational(text, where: str, strict: bool = True) -> Fraction:
    """Read a rational from a string; ``strict`` accepts only the canonical spelling."""
    if not isinstance(text, str):
        raise ValidationError(f"expected a rational as a string, got {type(text).__name__}", where)
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational: {text!r}", where) from None
    if strict and not (_CANONICAL.fullmatch(text) and text == format_rational(value)):
        raise ValidationError(f"rational {text!r} is not in lowest terms as p/q "
                              f"(expected {format_rational(value)!r})", where)
    return value


def _ident(value, where: str) -> Hashable:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValidationError("identifiers must be strings or integers", where)
    return value


def _integer(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError("expected an integer", where)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be at least {minimum}", where)
    return value


def _boolean(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ValidationError("expected true or false", where)
    return value


def _field(doc: Mapping, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"missing field {key!r}", where)
    return doc[key]


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ValidationError("expected a list", where)
    return value


def _object(value, where: str) -> Mapping:
    if not isinstance(value, dict):
        raise ValidationError("expected an object", where)
    return value


def _sorted_ids(ids) -> list:
    return sorted(ids, key=id_key)


def _dump(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _load(text: str) -> Mapping:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc.msg} at line {exc.lineno}") from None
    return _object(doc, "$")


# -- instances -------------------------------------------------------------------

def _graph_doc(graph: Digraph, with_immune: bool) -> dict:
    arcs = []
    for a in sorted(graph.arcs, key=lambda a: id_key(a.id)):
        entry = {"id": a.id, "tail": a.tail, "head": a.head,
                 "capacity": format_rational(a.capacity)}
        if with_immune:
            entry["immune"] = a.immune
        arcs.append(entry)
    return {"nodes": _sorted_ids(graph.nodes), "arcs": arcs}


def _undirected_doc(graph: UndirectedGraph) -> dict:
    return {"vertices": _sorted_ids(graph.vertices),
            "edges": sorted((_sorted_ids(e) for e in graph.edges),
                            key=lambda p: (id_key(p[0]), id_key(p[1])))}


def instance_document(instance) -> dict:
    """The canonical document of an instance as plain JSON data."""
    doc: dict = {"schema": SCHEMA_VERSION}
    if isinstance(instance, MrfInstance):
        doc["variant"] = "mrf"
        doc.update(_graph_doc(instance.graph, True))
        doc.update(source=instance.source, sink=instance.sink, k=instance.k)
        doc["threshold"] = (None if instance.threshold is None
                            else format_rational(instance.threshold))
    elif isinstance(instance, MrfRInstance):
        doc["variant"] = "mrf_r"
        doc.update(_graph_doc(instance.graph, False))
        doc.update(source=instance.source, sink=instance.sink, k=instance.k,
                   theta=format_rational(instance.theta),
                   compat=[list(e) for e in instance.compat.sorted_edges()],
                   integral=instance.integral)
    elif isinstance(instance, MrfMInstance):
        doc["variant"] = "mrf_m"
        doc.update(_graph_doc(instance.graph, False))
        doc["k"] = instance.k
        doc["commodities"] = [
            {"id": c.id, "source": c.source, "sink": c.sink, "demand": format_rational(c.demand)}
            for c in sorted(instance.commodities, key=lambda c: id_key(c.id))]
        doc["designated"] = instance.i0
    elif isinstance(instance, ColoringInstance):
        doc["variant"] = "coloring"
        doc.update(_undirected_doc(instance.graph))
        doc["colors"] = instance.colors
    elif isinstance(instance, CliqueInterdictionInstance):
        doc["variant"] = "clique_interdiction"
        doc.update(_undirected_doc(instance.graph))
        doc.update(size=instance.size, budget=instance.budget)
    else:
        raise ValidationError(f"cannot serialize a {type(instance).__name__}")
    return doc


def serialize(instance) -> str:
    return _dump(instance_document(instance))


def _read_graph(doc: Mapping, strict: bool, with_immune: bool) -> Digraph:
    nodes = [_ident(v, f"nodes[{i}]") for i, v in enumerate(_list(_field(doc, "nodes", "$"), "nodes"))]
    arcs = []
    for i, entry in enumerate(_list(_field(doc, "arcs", "$"), "arcs")):
        where = f"arcs[{i}]"
        entry = _object(entry, where)
        immune = False
        if "immune" in entry:
            immune = _boolean(entry["immune"], f"{where}.immune")
            if immune and not with_immune:
                raise ValidationError("immune arcs are not allowed in this variant", f"{where}.immune")
        arcs.append(Arc(_ident(_field(entry, "id", where), f"{where}.id"),
                        _ident(_field(entry, "tail", where), f"{where}.tail"),
                        _ident(_field(entry, "head", where), f"{where}.head"),
                        parse_rational(_field(entry, "capacity", where), f"{where}.capacity", strict),
                        immune))
    try:
        return Digraph(tuple(nodes), tuple(arcs))
    except ValidationError as exc:
        raise ValidationError(str(exc), "arcs") from None


def _read_undirected(doc: Mapping) -> UndirectedGraph:
    vertices = [_ident(v, f"vertices[{i}]")
                for i, v in enumerate(_list(_field(doc, "vertices", "$"), "vertices"))]
    if len(set(vertices)) != len(vertices):
        raise ValidationError("duplicate vertex", "vertices")
    edges = []
    for i, e in enumerate(_list(_field(doc, "edges", "$"), "edges")):
        e = _list(e, f"edges[{i}]")
        if len(e) != 2:
            raise ValidationError("an edge needs two endpoints", f"edges[{i}]")
        edges.append(tuple(_ident(v, f"edges[{i}]") for v in e))
    try:
        return UndirectedGraph(vertices, edges)
    except ValidationError as exc:
        raise ValidationError(str(exc), "edges") from None


def from_document(doc: Mapping, strict: bool = True):
    """Build an instance from decoded JSON data, checking every field."""
    doc = _object(doc, "$")
    version = _field(doc, "schema", "$")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {version!r}", "schema")
    variant = _field(doc, "variant", "$")
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r}", "variant")
    try:
        if variant == "mrf":
            threshold = doc.get("threshold")
            if threshold is not None:
                threshold = parse_rational(threshold, "threshold", strict)
            return MrfInstance(_read_graph(doc, strict, True), _ident(_field(doc, "source", "$"), "source"),
                               _ident(_field(doc, "sink", "$"), "sink"),
                               _integer(_field(doc, "k", "$"), "k", 1), threshold)
        if variant == "mrf_r":
            graph = _read_graph(doc, strict, False)
            edges = []
            for i, e in enumerate(_list(doc.get("compat", []), "compat")):
                e = _list(e, f"compat[{i}]")
                if len(e) != 2:
                    raise ValidationError("a compatibility edge needs two arcs", f"compat[{i}]")
                edges.append(frozenset(_ident(a, f"compat[{i}]") for a in e))
                if len(edges[-1]) != 2:
                    raise ValidationError("an arc is not compatible with itself", f"compat[{i}]")
            if len(set(edges)) != len(edges):
                raise ValidationError("duplicate compatibility edge", "compat")
            return MrfRInstance(graph, _ident(_field(doc, "source", "$"), "source"),
                                _ident(_field(doc, "sink", "$"), "sink"),
                                _integer(_field(doc, "k", "$"), "k", 1),
                                CompatGraph(frozenset(edges)),
                                parse_rational(_field(doc, "theta", "$"), "theta", strict),
                                _boolean(doc.get("integral", False), "integral"))
        if variant == "mrf_m":
            graph = _read_graph(doc, strict, False)
            commodities = []
            for i, c in enumerate(_list(_field(doc, "commodities", "$"), "commodities")):
                where = f"commodities[{i}]"
                c = _object(c, where)
                try:
                    commodities.append(Commodity(
                        _ident(_field(c, "id", where), f"{where}.id"),
                        _ident(_field(c, "source", where), f"{where}.source"),
                        _ident(_field(c, "sink", where), f"{where}.sink"),
                        parse_rational(_field(c, "demand", where), f"{where}.demand", strict)))
                except ValidationError as exc:
                    if exc.path and exc.path.startswith(where):
                        raise
                    raise ValidationError(str(exc), where) from None
            return MrfMInstance(graph, _integer(_field(doc, "k", "$"), "k", 1), tuple(commodities),
                                _ident(_field(doc, "designated", "$"), "designated"))
        graph = _read_undirected(doc)
        if variant == "coloring":
            return ColoringInstance(graph, _integer(_field(doc, "colors", "$"), "colors", 1))
        return CliqueInterdictionInstance(graph, _integer(_field(doc, "size", "$"), "size", 1),
                                          _integer(_field(doc, "budget", "$"), "budget", 0))
    except ValidationError as exc:
        if exc.path:
            raise
        raise ValidationError(str(exc), variant) from None


def parse(text: str, strict: bool = True):
    """Instance from document text.

    With ``strict`` every rational must already be written in lowest terms;
    otherwise any exact spelling (``"3/6"``, ``"0.5"``) is accepted and
    reduced.
    """
    return from_document(_load(text), strict)


def canonical_instance(instance):
    """The instance rebuilt from its document, so node and arc order are canonical."""
    return from_document(instance_document(instance))


def canonical(text: str) -> str:
    """The canonical spelling of a document (rationals reduced, lists sorted)."""
    return serialize(parse(text, strict=False))


# -- witnesses -------------------------------------------------------------------

def witness_document(witness) -> dict:
    doc: dict = {"schema": SCHEMA_VERSION}
    if isinstance(witness, PathFlow):
        doc["witness"] = "path_flow"
        doc["paths"] = [{"commodity": p.commodity, "arcs": list(p.arcs), "value": format_rational(v)}
                        for p, v in witness.items()]
    elif isinstance(witness, FractionalColoring):
        doc["witness"] = "fractional_coloring"
        doc["sets"] = [{"vertices": _sorted_ids(s), "weight": format_rational(w)}
                       for s, w in witness.items()]
    elif isinstance(witness, (set, frozenset, tuple, list)):
        doc["witness"] = "vertex_set"
        doc["vertices"] = _sorted_ids(witness)
    else:
        raise ValidationError(f"cannot serialize a {type(witness).__name__} witness")
    return doc


def serialize_witness(witness) -> str:
    return _dump(witness_document(witness))


def parse_witness(text: str, strict: bool = True):
    """A :class:`PathFlow`, :class:`FractionalColoring` or frozenset of vertices."""
    doc = _load(text)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {doc.get('schema')!r}", "schema")
    kind = _field(doc, "witness", "$")
    if kind not in WITNESS_KINDS:
        raise ValidationError(f"unknown witness kind {kind!r}", "witness")
    if kind == "path_flow":
        entries = []
        for i, p in enumerate(_list(_field(doc, "paths", "$"), "paths")):
            where = f"paths[{i}]"
            p = _object(p, where)
            commodity = p.get("commodity")
            if commodity is not None:
                commodity = _ident(commodity, f"{where}.commodity")
            arcs = tuple(_ident(a, f"{where}.arcs") for a in _list(_field(p, "arcs", where), f"{where}.arcs"))
            value = parse_rational(_field(p, "value", where), f"{where}.value", strict)
            if value < 0:
                raise ValidationError("negative flow value", f"{where}.value")
            entries.append((Path(arcs, commodity), value))
        return PathFlow(entries)
    if kind == "fractional_coloring":
        weights: dict = {}
        for i, s in enumerate(_list(_field(doc, "sets", "$"), "sets")):
            where = f"sets[{i}]"
            s = _object(s, where)
            members = frozenset(_ident(v, f"{where}.vertices")
                                for v in _list(_field(s, "vertices", where), f"{where}.vertices"))
            w = parse_rational(_field(s, "weight", where), f"{where}.weight", strict)
            weights[members] = weights.get(members, Fraction(0)) + w
        return FractionalColoring(weights)
    return frozenset(_ident(v, "vertices") for v in _list(_field(doc, "vertices", "$"), "vertices"))


# -- provenance ------------------------------------------------------------------

def _plain(value) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    return None


def provenance_document(artifact: ReductionArtifact) -> dict:
    """Construction kind, scalar parameters and the role of every output element."""
    params = {}
    for key in sorted(artifact.parameters):
        value = _plain(artifact.parameters[key])
        if value is not None:
            params[key] = value
    return {"schema": SCHEMA_VERSION, "construction": artifact.kind, "parameters": params,
            "elements": artifact.provenance_table()}


def serialize_provenance(artifact: ReductionArtifact) -> str:
    return _dump(provenance_document(artifact))


# -- generators ------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """A seed, a family name and that family's size parameters.

    ``random_dag``: ``n``, ``arcs``, ``k``; optional ``variant`` (``mrf_r``
    or ``mrf``), ``theta`` and ``match`` (chance that a pair of the random
    matching becomes a compatibility edge).  ``random_compat``: as above but
    every pair of arcs is compatible with chance ``p``.  ``coloring_graph``:
    ``n``, ``p``, ``colors``.  ``clique_graph``: ``n``, ``p``, ``size``,
    ``budget``.  Probabilities are rationals.
    """
    seed: int
    family: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be an integer in [0, 2^64)", "seed")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}", "family")
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        doc = dict(_load(text))
        seed = _field(doc, "seed", "$")
        family = _field(doc, "family", "$")
        params = doc.pop("params", None)
        if params is None:
            params = {k: v for k, v in doc.items() if k not in ("seed", "family")}
        return cls(seed, family, _object(params, "params"))

    def to_json(self) -> str:
        return _dump({"seed": self.seed, "family": self.family,
                      "params": {k: self.params[k] for k in sorted(self.params)}})


def _param_int(params: Mapping, key: str, default=None, minimum: int = 0) -> int:
    value = params.get(key, default)
    if value is None:
        raise ValidationError(f"missing size parameter {key!r}", f"params.{key}")
    return _integer(value, f"params.{key}", minimum)


def _param_probability(params: Mapping, key: str, default: str) -> Fraction:
    value = params.get(key, default)
    if isinstance(value, int) and not isinstance(value, bool):
        value = str(value)
    p = parse_rational(value, f"params.{key}", strict=False)
    if not 0 <= p <= 1:
        raise ValidationError("probability must lie in [0, 1]", f"params.{key}")
    return p


def _coin(rng: random.Random, p: Fraction) -> bool:
    return rng.randrange(p.denominator) < p.numerator


def _random_dag(rng: random.Random, n: int, m: int) -> tuple[Digraph, str, str]:
    """Nodes in a hidden topological order; a random source-sink chain comes first."""
    if n < 2:
        raise ValidationError("need at least two nodes", "params.n")
    names = ["s"] + [f"v{i}" for i in range(1, n - 1)] + ["t"]
    inner = rng.sample(range(1, n - 1), rng.randrange(min(n - 2, m - 1) + 1))
    chain = [0] + sorted(inner) + [n - 1]
    pairs = list(zip(chain, chain[1:]))
    while len(pairs) < m:
        i, j = sorted(rng.sample(range(n), 2))
        pairs.append((i, j))
    pairs.sort()
    arcs = [Arc(f"a{x}", names[i], names[j]) for x, (i, j) in enumerate(pairs, start=1)]
    return Digraph(tuple(names), tuple(arcs)), "s", "t"


def _random_graph(rng: random.Random, n: int, p: Fraction) -> UndirectedGraph:
    if n < 1:
        raise ValidationError("need at least one vertex", "params.n")
    return UndirectedGraph(range(1, n + 1),
                           [e for e in combinations(range(1, n + 1), 2) if _coin(rng, p)])


def generate(spec: GeneratorSpec):
    """Instance of the requested family in canonical form, a pure function of ``spec``."""
    return canonical_instance(_generate(spec))


def _generate(spec: GeneratorSpec):
    rng = random.Random(spec.seed)
    params = spec.params
    if spec.family in ("random_dag", "random_compat"):
        n = _param_int(params, "n", minimum=2)
        m = _param_int(params, "arcs", minimum=1)
        k = _param_int(params, "k", 1, minimum=1)
        graph, s, t = _random_dag(rng, n, m)
        variant = params.get("variant", "mrf_r")
        if variant == "mrf":
            if "theta" in params:
                raise ValidationError("plain instances take no demand", "params.theta")
            threshold = params.get("threshold")
            if threshold is not None:
                threshold = parse_rational(threshold, "params.threshold", strict=False)
            return MrfInstance(graph, s, t, k, threshold)
        if variant != "mrf_r":
            raise ValidationError(f"unknown variant {variant!r}", "params.variant")
        ids = [a.id for a in graph.arcs]
        edges = set()
        if spec.family == "random_dag":
            chance = _param_probability(params, "match", "1")
            order = ids[:]
            rng.shuffle(order)
            for a, b in zip(order[0::2], order[1::2]):
                if _coin(rng, chance):
                    edges.add(frozenset((a, b)))
        else:
            chance = _param_probability(params, "p", "1/2")
            for a, b in combinations(ids, 2):
                if _coin(rng, chance):
                    edges.add(frozenset((a, b)))
        theta = params.get("theta", "1")
        if isinstance(theta, int) and not isinstance(theta, bool):
            theta = str(theta)
        return MrfRInstance(graph, s, t, k, CompatGraph(frozenset(edges)),
                            parse_rational(theta, "params.theta", strict=False),
                            _boolean(params.get("integral", False), "params.integral"))
    n = _param_int(params, "n", minimum=1)
    graph = _random_graph(rng, n, _param_probability(params, "p", "1/2"))
    if spec.family == "coloring_graph":
        return ColoringInstance(graph, _param_int(params, "colors", 2, minimum=1))
    return CliqueInterdictionInstance(graph, _param_int(params, "size", 3, minimum=1),
                                      _param_int(params, "budget", 1, minimum=0))
