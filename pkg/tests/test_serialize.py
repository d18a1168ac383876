from __future__ import annotations

import json
from fractions import Fraction

import pytest

from conftest import boundary_zero_instance, toy_instance, two_generator_instance
from qmcert.certgen import SearchLimits, search_certificate
from qmcert.frame import build_simplex, check_assumptions
from qmcert.polyring import MultiPoly, parse
from qmcert.qmodule import BallW, Constant, Generator, Power, Product, Square, Sum, assemble, iter_nodes
from qmcert.serialize import (
    CERTIFICATE_FORMAT,
    DEFAULT_OPTIONS,
    InstanceFormatError,
    certificate_from_json,
    certificate_to_json,
    dumps,
    instance_from_json,
    instance_to_json,
    report_to_json,
    tree_from_json,
    tree_to_json,
    verdict_to_json,
)
from qmcert.verify import Verdict, verify_certificate

CERT_KEYS = {"format", "schema_version", "tool_version", "created", "n", "M", "tier", "kappa",
             "simplex_a", "parameters", "warnings", "tree"}
NODE_TAGS = {"sum", "product", "power", "square", "positive_univariate", "generator", "ball_w", "constant"}
VERDICT_KEYS = {"ok", "identity_ok", "leaves_ok", "tier", "statement", "mismatch", "leaf_failures"}
REPORT_KEYS = {"archimedean", "generator_degrees_even", "f_degree_even", "q_positive", "s_infinity_in_ball",
               "f_leading_positive_at_infinity", "s_nonempty", "f_positive_on_s"}


def _reload(obj):
    return json.loads(dumps(obj))


@pytest.mark.parametrize("make", [toy_instance, boundary_zero_instance, two_generator_instance])
def test_instance_round_trip(make):
    inst = make()
    limits = SearchLimits(max_k=3, max_kappa=17)
    back, lim, opts = instance_from_json(_reload(instance_to_json(inst, limits, {"tier": "sos"})))
    assert (back.n, back.g, back.f, back.q, back.N) == (inst.n, inst.g, inst.f, inst.q, inst.N)
    assert back.archimedean_witness == inst.archimedean_witness
    assert lim == limits
    assert opts == {**DEFAULT_OPTIONS, "tier": "sos"}


def test_shipped_instances_load(instances_dir):
    for path in sorted(instances_dir.glob("*.json")):
        inst, _, _ = instance_from_json(json.loads(path.read_text()))
        assert inst.archimedean_witness is not None, path.name


@pytest.mark.parametrize("patch,location", [
    ({"n": 0}, "n"),
    ({"g": "1 - X1^2"}, "g"),
    ({"g": ["1 - X1^^2"]}, "g[0]"),
    ({"f": "Y^2 + X2"}, "f"),
    ({"q": "Y^2 + X1"}, "q"),
    ({"N": "one"}, "N"),
    ({"N": 1.5}, "N"),
    ({"options": {"tier": "fast"}}, "options.tier"),
    ({"witness": {"sigma0": [], "generators": [{"index": 1, "squares": [{"weight": "2", "poly": "1"}]}]}}, "instance"),
])
def test_instance_errors_name_the_field(patch, location):
    doc = {**instance_to_json(toy_instance()), **patch}
    with pytest.raises(InstanceFormatError) as info:
        instance_from_json(doc)
    assert info.value.location == location


def test_polynomial_error_reports_column():
    doc = {**instance_to_json(toy_instance()), "f": "Y^2 + * 1"}
    with pytest.raises(InstanceFormatError) as info:
        instance_from_json(doc)
    assert info.value.line == 1 and info.value.column == 7
    assert "column 7" in str(info.value)


def test_missing_field():
    doc = instance_to_json(toy_instance())
    del doc["q"]
    with pytest.raises(InstanceFormatError, match="missing field 'q'"):
        instance_from_json(doc)


@pytest.fixture(scope="module")
def toy_cert():
    inst = toy_instance()
    res = search_certificate(inst, SearchLimits())
    return inst, assemble(inst, res.params, res.expansion, "B")


def test_certificate_round_trip_and_schema(toy_cert):
    inst, cert = toy_cert
    doc = _reload(certificate_to_json(cert, inst.n, created="2000-01-01T00:00:00+00:00"))
    assert set(doc) == CERT_KEYS
    assert doc["format"] == CERTIFICATE_FORMAT and doc["schema_version"] == 1
    back = certificate_from_json(doc)
    assert back.tree == cert.tree
    assert (back.M, back.tier, back.kappa, back.frame_a, back.params) == (
        cert.M, cert.tier, cert.kappa, cert.frame_a, cert.params)
    assert verify_certificate(inst, back).ok
    # every node tag used is one of the documented ones
    tags = set()

    def walk(d):
        tags.add(d["node"])
        for c in d.get("children", []):
            walk(c)
        if "base" in d:
            walk(d["base"])

    walk(doc["tree"])
    assert tags <= NODE_TAGS
    assert {"sum", "product", "square", "positive_univariate", "generator", "ball_w", "constant"} <= tags


def test_every_node_kind_round_trips():
    tree = Sum((Product((Constant(Fraction(2, 3)), Generator(2))), Power(BallW(), 4),
                Square(parse("X1 - 1/2*X2*Y", 2))))
    assert tree_from_json(_reload(tree_to_json(tree)), 2) == tree


def test_tree_decoding_errors():
    with pytest.raises(InstanceFormatError, match="unknown node kind"):
        tree_from_json({"node": "cube"}, 1)
    with pytest.raises(InstanceFormatError):
        tree_from_json({"node": "sum", "children": {}}, 1)
    with pytest.raises(InstanceFormatError):
        certificate_from_json({"format": "something-else"})


def test_verdict_json_caps_mismatch():
    big = MultiPoly(1, {(i, 0, 0): Fraction(1) for i in range(10)})
    v = Verdict(False, True, "A", mismatch=big)
    doc = _reload(verdict_to_json(v, cap=4))
    assert set(doc) == VERDICT_KEYS
    assert doc["mismatch"]["terms"] == 10 and doc["mismatch"]["truncated"]
    assert "X1^9" in doc["mismatch"]["difference"] and "X1^5" not in doc["mismatch"]["difference"]
    ok = _reload(verdict_to_json(Verdict(True, True, "B")))
    assert ok["ok"] and ok["mismatch"] is None and ok["leaf_failures"] == []


def test_report_json():
    inst = boundary_zero_instance()
    rep = check_assumptions(inst, build_simplex(1, inst.N))
    doc = _reload(report_to_json(rep))
    assert set(doc["assumptions"]) == REPORT_KEYS
    assert doc["falsified"] == ["f_leading_positive_at_infinity"]
    assert doc["assumptions"]["f_leading_positive_at_infinity"]["witness"] in (["1"], ["-1"])


def test_golden_certificate(instances_dir, toy_cert):
    """The serialised toy certificate is stable apart from the timestamp."""
    inst, _ = toy_cert
    res = search_certificate(inst, SearchLimits())
    cert = assemble(inst, res.params, res.expansion, "A")
    doc = _reload(certificate_to_json(cert, inst.n, created="fixed"))
    golden = instances_dir.parent / "tests" / "golden" / "toy_certificate.json"
    expected = json.loads(golden.read_text())
    expected["tool_version"] = doc["tool_version"]
    assert doc == expected
    assert all(isinstance(p, str) for p, _ in iter_nodes(cert.tree))
