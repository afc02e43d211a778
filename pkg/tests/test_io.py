import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mrflab.errors import ValidationError
from mrflab.instances import (Arc, Commodity, Digraph, MrfInstance, MrfMInstance, Path, PathFlow,
                              enumerate_st_paths, find_cycle)
from mrflab.io import (CliqueInterdictionInstance, ColoringInstance, GeneratorSpec, canonical,
                       format_rational, from_document, generate, instance_document, parse,
                       parse_rational, parse_witness, provenance_document, serialize,
                       serialize_provenance, serialize_witness)
from mrflab.oracles import UndirectedGraph
from mrflab.reductions import FractionalColoring, reduce_coloring_to_mrfr


def _doc():
    return {"schema": 1, "variant": "mrf", "nodes": ["s", "t"],
            "arcs": [{"id": "a", "tail": "s", "head": "t", "capacity": "1/2"}],
            "source": "s", "sink": "t", "k": 1, "threshold": None}


def test_rational_spelling():
    assert format_rational(Fraction(6, 2)) == "3"
    assert format_rational(Fraction(-1, 2)) == "-1/2"
    assert parse_rational("1/2", "x") == Fraction(1, 2)
    for bad in ("3/6", "1/1", "+1", "0.5", " 1", "-0", "01"):
        with pytest.raises(ValidationError):
            parse_rational(bad, "x")
    assert parse_rational("3/6", "x", strict=False) == Fraction(1, 2)
    with pytest.raises(ValidationError):
        parse_rational(1, "x")


def test_unreduced_capacity_strict_and_lenient():
    doc = _doc()
    doc["arcs"][0]["capacity"] = "3/6"
    text = json.dumps(doc)
    with pytest.raises(ValidationError) as err:
        parse(text)
    assert err.value.path == "arcs[0].capacity"
    assert parse(text, strict=False).graph.capacity("a") == Fraction(1, 2)
    assert '"capacity": "1/2"' in canonical(text)


def test_unknown_variant():
    doc = _doc()
    doc["variant"] = "mrf_x"
    with pytest.raises(ValidationError):
        from_document(doc)


def test_missing_field_names_its_location():
    doc = _doc()
    del doc["arcs"][0]["head"]
    with pytest.raises(ValidationError) as err:
        from_document(doc)
    assert "arcs[0]" in str(err.value)


def test_bad_schema_version():
    doc = _doc()
    doc["schema"] = 2
    with pytest.raises(ValidationError):
        from_document(doc)


def _examples():
    k3 = UndirectedGraph.complete(3)
    g = Digraph(("s", "v", "t"), (Arc("a", "s", "v", 2, immune=True), Arc("b", "v", "t", Fraction(3, 2))))
    return [
        MrfInstance(g, "s", "t", 1, Fraction(1, 3)),
        MrfInstance(g, "s", "t", 1),
        reduce_coloring_to_mrfr(k3, 3).instance,
        MrfMInstance(Digraph(("s", "t"), (Arc("a", "s", "t", 4),)), 2,
                     (Commodity("x", "s", "t", 3), Commodity("y", "s", "t", Fraction(1, 2))), "x"),
        ColoringInstance(k3, 3),
        CliqueInterdictionInstance(UndirectedGraph.cycle(5), 3, 1),
    ]


@pytest.mark.parametrize("inst", _examples())
def test_round_trip(inst):
    text = serialize(inst)
    back = parse(text)
    assert serialize(back) == text
    assert canonical(text) == text
    assert instance_document(back) == json.loads(text)


def test_canonical_sorts_and_reduces():
    doc = _doc()
    doc["nodes"] = ["t", "s"]
    doc["arcs"].insert(0, {"id": "b", "tail": "s", "head": "t", "capacity": "4/2"})
    text = canonical(json.dumps(doc))
    out = json.loads(text)
    assert out["nodes"] == ["s", "t"]
    assert [a["id"] for a in out["arcs"]] == ["a", "b"]
    assert out["arcs"][1]["capacity"] == "2"
    assert canonical(text) == text


def test_witness_documents():
    flow = PathFlow({Path(("a", "b"), "c1"): Fraction(1, 3), Path(("x",)): 2})
    assert parse_witness(serialize_witness(flow)) == flow
    coloring = FractionalColoring({frozenset({1, 2}): Fraction(1, 2), frozenset({3}): 1})
    assert dict(parse_witness(serialize_witness(coloring))) == dict(coloring)
    assert parse_witness(serialize_witness({3, 1})) == frozenset({1, 3})
    with pytest.raises(ValidationError):
        parse_witness(json.dumps({"schema": 1, "witness": "bogus"}))


def test_provenance_document():
    art = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3)
    doc = provenance_document(art)
    assert doc["construction"] == art.kind
    assert doc["parameters"]["colors"] == 3
    ids = {(e["kind"], e["id"]) for e in doc["elements"]}
    assert ("arc", "e1.1") in ids and ("node", "z1") in ids
    assert json.loads(serialize_provenance(art)) == doc


def test_generator_is_deterministic():
    spec = GeneratorSpec(7, "random_dag", {"n": 5, "arcs": 7, "k": 2})
    assert serialize(generate(spec)) == serialize(generate(spec))
    assert GeneratorSpec.from_json(spec.to_json()) == spec
    flat = GeneratorSpec.from_json('{"seed": 7, "family": "random_dag", "n": 5, "arcs": 7, "k": 2}')
    assert flat == spec


def test_generator_rejects_bad_specs():
    with pytest.raises(ValidationError):
        GeneratorSpec(-1, "random_dag", {})
    with pytest.raises(ValidationError):
        GeneratorSpec(1, "random_tree", {})
    with pytest.raises(ValidationError):
        generate(GeneratorSpec(1, "random_dag", {"n": 4, "arcs": 5, "variant": "mrf_q"}))


@given(st.integers(0, 2 ** 64 - 1), st.integers(2, 7), st.integers(1, 12))
def test_random_dag_contract(seed, n, arcs):
    inst = generate(GeneratorSpec(seed, "random_dag", {"n": n, "arcs": arcs, "k": 1}))
    assert len(inst.graph.arcs) == arcs
    assert not find_cycle(inst.graph)
    assert enumerate_st_paths(inst.graph, inst.source, inst.sink, limit=None)
    assert parse(serialize(inst)) == inst


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 8))
def test_random_graph_is_simple(seed, n):
    inst = generate(GeneratorSpec(seed, "coloring_graph", {"n": n, "p": "1/2", "colors": 2}))
    g = inst.graph
    assert len(g.vertices) == n
    assert all(len(e) == 2 for e in g.edges)
    assert parse(serialize(inst)) == inst
