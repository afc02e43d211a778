import json
from io import StringIO

import pytest

from mrflab.cli import main
from mrflab.instances import MrfInstance
from mrflab.io import ColoringInstance, CliqueInterdictionInstance, parse, parse_witness, serialize
from mrflab.oracles import UndirectedGraph
from mrflab.reductions import reduce_coloring_to_mrfr

from corpora import smallest_pipeline_instances


def run(*argv):
    out = StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def chain(tmp_path):
    """Three bundles of three unit arcs in series, one failure, threshold 2."""
    g = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3).instance.graph
    path = tmp_path / "chain.json"
    path.write_text(serialize(MrfInstance(g, "z1", "z4", 1, 2)))
    return path


def test_decide_writes_witness(chain, tmp_path):
    code, text = run("decide", chain)
    assert code == 0
    assert text.splitlines()[:2] == ["YES", "value 2"]
    witness = tmp_path / "chain.witness.json"
    flow = parse_witness(witness.read_text())
    assert flow.value() == 3
    code, text = run("decide", chain, "--check-witness", witness)
    assert code == 0 and "robust value 2" in text


def test_tampered_witness_is_rejected(chain, tmp_path):
    run("decide", chain)
    witness = tmp_path / "chain.witness.json"
    doc = json.loads(witness.read_text())
    doc["paths"][0]["value"] = "5"
    witness.write_text(json.dumps(doc))
    code, text = run("decide", chain, "--check-witness", witness)
    assert code == 1 and "rejected" in text


def test_threshold_flag(chain):
    assert run("decide", chain, "--threshold", "5/2")[1].startswith("NO")


def test_solve_and_dump(chain, tmp_path):
    dump = tmp_path / "lp.txt"
    code, text = run("--dump-lp", dump, "solve", chain, "--witness", tmp_path / "w.json")
    assert code == 0 and "value 2" in text
    assert dump.read_text().startswith("maximize")
    code, text = run("solve", chain, "--integral", "--witness", tmp_path / "wi.json")
    assert code == 0 and "value 2" in text


def test_path_limit_exit_code(chain):
    assert run("decide", chain, "--path-limit", "10")[0] == 2
    assert run("--path-limit", "10", "decide", chain)[0] == 2


def test_gen_is_byte_identical(tmp_path):
    spec = '{"seed": 3, "family": "random_dag", "n": 5, "arcs": 7, "k": 2}'
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("gen", "--spec", spec, "--out", a)[0] == 0
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(spec)
    assert run("gen", "--spec", spec_file, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_reduce_full_writes_every_stage(tmp_path):
    src = tmp_path / "k3.json"
    src.write_text(serialize(ColoringInstance(UndirectedGraph.complete(3), 3)))
    code, text = run("reduce", src, "--to", "full", "--out", tmp_path / "k3out.json")
    assert code == 0
    for stage in ("mrf_r", "mrf_m", "mrf"):
        assert (tmp_path / f"k3out.{stage}.json").exists()
        assert (tmp_path / f"k3out.{stage}.provenance.json").exists()
    final = parse((tmp_path / "k3out.mrf.json").read_text())
    assert final.threshold == 3268683
    assert "immune arcs kept" in text


def test_reduce_small_instance_and_verify(tmp_path):
    inst, _ = smallest_pipeline_instances()[0]
    src = tmp_path / "small.json"
    src.write_text(serialize(inst))
    code, text = run("verify", src)
    assert code == 0
    assert text.splitlines()[-1] == "all stages agree"
    assert len(text.splitlines()) == 5
    out = tmp_path / "small.mrf.json"
    assert run("reduce", src, "--to", "mrf", "--out", out)[0] == 0
    assert isinstance(parse(out.read_text()), MrfInstance)


def test_verify_coloring(tmp_path):
    src = tmp_path / "c5.json"
    src.write_text(serialize(ColoringInstance(UndirectedGraph.cycle(5), 2)))
    code, text = run("--path-limit", "1000", "verify", src)
    lines = text.splitlines()
    assert lines[:3] == ["chi_f oracle: NO", "mrf_r: NO", "mrf_r normalized: NO"]
    assert code in (0, 2)


def test_oracles(tmp_path):
    src = tmp_path / "c5.json"
    src.write_text(serialize(ColoringInstance(UndirectedGraph.cycle(5), 3)))
    code, text = run("oracle", "chif", src)
    assert code == 0 and text.startswith("chi_f 5/2\nat most 3: YES")
    k4 = tmp_path / "k4.json"
    k4.write_text(serialize(CliqueInterdictionInstance(UndirectedGraph.complete(4), 3, 1)))
    assert run("oracle", "clique-interdiction", k4)[1] == "NO\n"
    code, text = run("decide", k4)
    assert code == 0 and text.startswith("NO")


def test_coloring_decision_witness(tmp_path):
    src = tmp_path / "k3.json"
    src.write_text(serialize(ColoringInstance(UndirectedGraph.complete(3), 3)))
    code, text = run("decide", src)
    assert code == 0 and text.startswith("YES")
    code, text = run("decide", src, "--check-witness", tmp_path / "k3.witness.json")
    assert code == 0 and "colors 3" in text


def test_bad_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 1, "variant": "nope"}))
    assert run("decide", bad)[0] == 1
    assert run("decide", tmp_path / "missing.json")[0] == 1
    lenient = tmp_path / "lenient.json"
    doc = {"schema": 1, "variant": "mrf", "nodes": ["s", "t"],
           "arcs": [{"id": "a", "tail": "s", "head": "t", "capacity": "2/2"}],
           "source": "s", "sink": "t", "k": 1, "threshold": "0"}
    lenient.write_text(json.dumps(doc))
    assert run("decide", lenient)[0] == 1
    assert run("--lenient", "decide", lenient)[0] == 0


def test_outputs_are_byte_identical(chain, tmp_path):
    first = run("decide", chain, "--witness", tmp_path / "one.json")[1]
    second = run("decide", chain, "--witness", tmp_path / "two.json")[1]
    assert first.replace("one", "two") == second
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
