import json
import random
from fractions import Fraction
from importlib import resources

import pytest

from flagcalc import serialize as ser
from flagcalc.errors import InputError
from flagcalc.flags import Flag, TypeSigma
from flagcalc.kernels import RootedKernel, exact_hom, random_kernel
from flagcalc.library import (DIGRAPHS, EDGE, GRAPHS, HYPERGRAPHS3, K3, THEORIES, TRIANGLE_FREE, asset_objects,
                              digraph, graph, hypergraph, path, two_type_graph_kernel, worked_certificate)
from flagcalc.algebra import from_flag
from flagcalc.verify import check_certificate


def roundtrip(obj):
    return json.loads(ser.dumps(obj))


def test_rationals():
    assert ser.frac_to_str(Fraction(2, 4)) == "1/2"
    assert ser.frac_to_str(-3) == "-3/1"
    assert ser.frac_from_str("6/8") == Fraction(3, 4)
    for bad in ("1/0", "x", 1.5, True, None):
        with pytest.raises(InputError):
            ser.frac_from_str(bad)


@pytest.mark.parametrize("theory", list(THEORIES.values()))
def test_theory_roundtrip(theory):
    again = ser.theory_from_json(roundtrip(ser.theory_to_json(theory)))
    assert again == theory


@pytest.mark.parametrize("model", [path(4), digraph(3, [(1, 2), (3, 1)]), hypergraph(4, [(1, 2, 4)]), graph(0)])
def test_model_roundtrip(model):
    assert ser.model_from_json(roundtrip(ser.model_to_json(model)), model.theory) == model


def test_digraph_bits_are_ordered_lists():
    d = ser.model_to_json(digraph(2, [(2, 1)]))
    assert d["colors"]["2"][0] == {"support": [1, 2], "bits": {"A": [False, True]}}


def test_element_roundtrip():
    a = from_flag(Flag(EDGE, 1)) * 3 - from_flag(Flag(graph(2), 1)) * Fraction(1, 7)
    b = ser.element_from_json(roundtrip(ser.element_to_json(a)))
    assert b == a and b.vector() == a.vector()


def test_kernel_roundtrips():
    rng = random.Random(1)
    for W in (two_type_graph_kernel(alpha=(Fraction(1, 3), Fraction(2, 3))), random_kernel(DIGRAPHS, 2, rng),
              random_kernel(HYPERGRAPHS3, 2, rng)):
        again = ser.kernel_from_json(roundtrip(ser.kernel_to_json(W)))
        assert again.distributions == W.distributions and again.weights == W.weights
    R = RootedKernel(two_type_graph_kernel(), (0, 1), TypeSigma(EDGE))
    R2 = ser.any_kernel_from_json(roundtrip(ser.rooted_kernel_to_json(R)))
    assert R2.root_types == R.root_types and R2.sigma == R.sigma
    assert exact_hom(R2, Flag(K3, 2)) == exact_hom(R, Flag(K3, 2))


def test_certificate_roundtrip():
    cert = worked_certificate()
    again = ser.certificate_from_json(roundtrip(ser.certificate_to_json(cert)))
    assert again.target == cert.target
    assert check_certificate(again, panel_size=5).passed


def test_serialization_is_canonical():
    a = ser.dumps(ser.kernel_to_json(two_type_graph_kernel()))
    assert a == ser.dumps(json.loads(a))


@pytest.mark.parametrize("make", [
    lambda: ser.model_from_json({"n": 1, "colors": {}, "extra": 0}, GRAPHS),
    lambda: ser.model_from_json({"n": 2, "colors": {"2": [{"support": [1, 2], "bits": {"E": 1}}]}}, GRAPHS),
    lambda: ser.model_from_json({"n": 2, "colors": {"2": [{"support": [1, 2], "bits": {"E": True, "F": True}}]}},
                                GRAPHS),
    lambda: ser.theory_from_json("planar graphs"),
    lambda: ser.theory_from_json({"name": "x", "arity_bound": 2, "predicates": [], "junk": 1}),
    lambda: ser.kernel_from_json({"theory": "graphs", "types": [{"name": "a", "weight": "1/1", "w": 0}],
                                  "distributions": {}}),
    lambda: ser.element_from_json({"theory": "graphs", "sigma": {"n": 0, "colors": {}}, "level": 2, "terms": [],
                                   "note": ""}),
])
def test_unknown_or_malformed_fields_rejected(make):
    with pytest.raises(InputError):
        make()


def test_shipped_assets_match_library():
    root = resources.files("flagcalc") / "assets"
    for rel, obj in asset_objects().items():
        shipped = json.loads((root / rel).read_text())
        assert shipped == roundtrip(obj), rel
    tf = ser.theory_from_json(json.loads((root / "theories/triangle-free.json").read_text()))
    assert tf == TRIANGLE_FREE
