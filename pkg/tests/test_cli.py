import json
from importlib import resources

import pytest

from flagcalc import serialize as ser
from flagcalc.cli import run
from flagcalc.flags import Flag
from flagcalc.library import EDGE, graph

ASSETS = resources.files("flagcalc") / "assets"


def asset(rel):
    return str(ASSETS / rel)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(ser.dumps(obj))
    return str(p)


def test_models_enumerate(capsys):
    assert run(["models", "enumerate", "--theory", "graphs", "--n", "4"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 11
    assert run(["models", "enumerate", "--theory", asset("theories/triangle-free.json"), "--n", "3"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 3


def test_measure_eval_and_global_flags_anywhere(capsys, tmp_path):
    assert run(["measure", "eval", "--kernel", asset("kernels/graph-three-quarters.json"),
                "--flag", asset("flags/triangle.json")]) == 0
    assert capsys.readouterr().out.strip() == "27/64"
    out = tmp_path / "v.txt"
    assert run(["--out", str(out), "measure", "eval", "--kernel", asset("kernels/graph-half.json"),
                "--flag", asset("flags/edge.json")]) == 0
    assert out.read_text().strip() == "1/2"
    assert run(["measure", "sample", "--kernel", asset("kernels/graph-half.json"), "--n", "5", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert run(["--seed", "7", "measure", "sample", "--kernel", asset("kernels/graph-half.json"), "--n", "5"]) == 0
    assert capsys.readouterr().out == first


def test_rooted_eval(capsys, tmp_path):
    sigma = write(tmp_path, "v.json", ser.model_to_json(graph(1)))
    flag = write(tmp_path, "e1.json", ser.flag_to_json(Flag(EDGE, 1)))
    assert run(["measure", "eval", "--kernel", asset("kernels/bipartite-two-type.json"), "--sigma", sigma,
                "--root-types", "a", "--flag", flag]) == 0
    assert capsys.readouterr().out.strip() == "1/2"


def test_algebra_pipeline(capsys, tmp_path):
    sigma = write(tmp_path, "v.json", ser.model_to_json(graph(1)))
    flag = write(tmp_path, "e1.json", ser.flag_to_json(Flag(EDGE, 1)))
    elem = tmp_path / "e.json"
    assert run(["--out", str(elem), "algebra", "from-flag", "--theory", "graphs", "--sigma", sigma,
                "--flag", flag]) == 0
    sq = tmp_path / "sq.json"
    assert run(["--out", str(sq), "algebra", "mul", "--elem", str(elem), "--other", str(elem)]) == 0
    assert run(["algebra", "avg", "--elem", str(sq), "--k", "0"]) == 0
    avg = json.loads(capsys.readouterr().out)
    assert sorted(t["coeff"] for t in avg["terms"]) == ["1/1", "1/3"]
    assert run(["algebra", "iszero", "--elem", str(elem)]) == 0
    assert capsys.readouterr().out.strip() == "false"


def test_verify_exit_codes(capsys, tmp_path):
    report = tmp_path / "r.json"
    assert run(["verify", "cert", "--cert", asset("certificates/vertex-square.json"), "--panel", "5",
                "--report", str(report)]) == 0
    assert json.loads(report.read_text())["verdict"] == "pass"
    assert run(["verify", "cert", "--cert", asset("certificates/minus-unit.json"), "--panel", "5"]) == 1
    err = capsys.readouterr().err
    assert "FAIL" in err and "counterexample" in err


def test_input_errors_exit_two(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["verify", "cert", "--cert", str(tmp_path / "missing.json")])
    assert exc.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1, "colors": {}, "oops": 1}')
    assert run(["models", "check", "--theory", "graphs", "--model", str(bad)]) == 2
    bad.write_text("{not json")
    assert run(["models", "check", "--theory", "graphs", "--model", str(bad)]) == 2
    assert run(["models", "enumerate", "--theory", "no-such-theory", "--n", "2"]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["algebra", "lift"])
    assert exc.value.code == 2


def test_resource_errors_exit_three(tmp_path):
    assert run(["--max-size", "5", "flags", "enumerate", "--theory", "graphs", "--level", "7"]) == 3
    run(["--max-size", "10", "models", "enumerate", "--theory", "graphs", "--n", "1"])
    k = tmp_path / "k.json"
    from flagcalc.library import TRIANGLE_FREE, single_type_graph_kernel
    k.write_text(ser.dumps(ser.kernel_to_json(single_type_graph_kernel(1, theory=TRIANGLE_FREE))))
    assert run(["measure", "sample", "--kernel", str(k), "--n", "4"]) == 3
    assert run(["measure", "validate", "--kernel", str(k)]) == 1


def test_selftest_report_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["--out", str(a), "selftest", "--scale", "small"]) == 0
    assert run(["--out", str(b), "selftest", "--scale", "small"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["passed"] is True
