import json
import subprocess
import sys

import numpy as np
import pytest

from lpopalg.cli import dispatch


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = dispatch([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return _run


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


def report(out):
    return json.loads(out)


def test_opnorm_identity(run, files):
    m = files("id3.json", {"rows": np.eye(3).tolist()})
    code, out, err = run("opnorm", "--matrix", m, "--p", 1.5)
    assert code == 0
    rep = report(out)
    assert rep["outputs"]["lower_bound"] == 1.0
    assert rep["command"] == "opnorm" and rep["seed"] == 0 and len(rep["inputs_digest"]) == 64
    assert "wall_time" in err


def test_opnorm_certify(run, files):
    m = files("h.json", {"rows": [[1, 1], [1, -1]]})
    code, out, _ = run("opnorm", "--matrix", m, "--p", 4, "--certify")
    outp = report(out)["outputs"]
    assert code == 0 and outp["certified"]
    assert outp["upper_bound"] - outp["lower_bound"] <= 1e-4
    big = files("id4.json", {"rows": np.eye(4).tolist()})
    assert run("opnorm", "--matrix", big, "--p", 3, "--certify")[0] == 3


def test_lamperti_commands(run, files):
    swap = files("swap.json", {"rows": [[0, 1], [1, 0]]})
    code, out, _ = run("lamperti", "decompose", "--matrix", swap, "--p", 2)
    assert code == 3 and report(out)["error"]["type"] == "ExponentTwo"
    code, out, _ = run("lamperti", "decompose", "--matrix", swap, "--p", 3)
    assert code == 0 and report(out)["outputs"]["perm"] == [1, 0]
    half = files("half.json", {"rows": [[0.5, 0.5], [0.5, 0.5]]})
    code, out, _ = run("lamperti", "classify", "--matrix", half, "--p", 1.5)
    assert code == 0 and report(out)["outputs"]["spatial"] is False
    code, out, _ = run("lamperti", "decompose", "--matrix", half, "--p", 3)
    assert code == 2 and report(out)["error"]["type"] == "NotIsometry"


def test_complex_json_entries(run, files):
    m = files("diag.json", {"rows": [[[0, 1], 0], [0, [-1, 0]]]})
    code, out, _ = run("lamperti", "decompose", "--matrix", m, "--p", 1.5)
    assert code == 0
    assert report(out)["outputs"]["phases"] == [[0.0, 1.0], [-1.0, 0.0]]


def test_group_commands(run, files):
    ab = files("ab.json", {"a": 1, "b": [0, -1]})
    code, out, _ = run("group", "norm", "--group", "Z2", "--f", ab, "--p", 1)
    assert code == 0
    assert report(out)["outputs"]["norm"]["lower_bound"] == pytest.approx(np.sqrt(2), abs=1e-12)
    code, out, _ = run("group", "verify-isom", "--group", "S3", "--p", 1.5, "--trials", 20)
    assert code == 0 and report(out)["outputs"]["ok"]
    spec = files("hom.json", {"source": "Z4", "target": "Z2", "theta": [0, 1, 0, 1], "gamma": [1, 1, 1, 1]})
    code, out, _ = run("group", "hom", "--spec", spec, "--p", 3)
    assert code == 0 and report(out)["outputs"]["injective"] is False
    table = files("g.json", {"elements": ["e", "x"], "table": [[0, 1], [1, 0]]})
    vals = files("f.json", {"values": [1, 0]})
    code, out, _ = run("group", "norm", "--group", table, "--f", vals, "--p", 3)
    assert code == 0 and report(out)["outputs"]["norm"]["lower_bound"] == pytest.approx(1)


def test_cuntz_commands(run, files):
    code, out, _ = run("cuntz", "rep", "--n", 2, "--window", 64, "--p", 3, "--check")
    outp = report(out)["outputs"]
    assert code == 0 and outp["relations"]["ok"] and all(outp["spatial"].values())
    graph = files("g.json", {"vertices": [1, 2], "edges": [{"name": "a", "d": 1, "r": 2}]})
    asg = files("a.json", {
        "e": {"1": {"rows": [[1, 0], [0, 0]]}, "2": {"rows": [[0, 0], [0, 1]]}},
        "s": {"a": {"rows": [[0, 0], [1, 0]]}},
        "t": {"a": {"rows": [[0, 1], [0, 0]]}},
    })
    code, out, _ = run("cuntz", "graph", "--graph", graph, "--assignment", asg)
    outp = report(out)["outputs"]
    assert code == 0 and outp["ok"] and outp["span_dimension"] == 4


def test_dyn_commands(run, files):
    pt = files("x.json", {"letters": ["b", "a", "b"]})
    code, out, _ = run("dyn", "act", "--word", "a", "--point", pt)
    assert code == 0 and report(out)["outputs"]["output"]["letters"] == ["a", "b", "a", "b"]
    code, out, _ = run("dyn", "order-check", "--depth", 6)
    assert code == 0 and report(out)["outputs"]["ok"]
    code, out, _ = run("dyn", "census", "--word", "ab", "--depth", 8)
    assert report(out)["outputs"]["fraction"] == 0.0625
    act = files("act.json", {"group": "Z2", "points": ["p", "q"], "act": [[0, 1], [1, 0]]})
    f = files("f.json", {"values": [[1, 0], [0, 0]]})
    code, out, _ = run("dyn", "crossed-norm", "--action", act, "--f", f, "--p", 3)
    assert code == 0 and report(out)["outputs"]["norm"]["lower_bound"] == pytest.approx(1)
    swap = {"0": {"p": "p", "q": "q"}, "1": {"p": "q", "q": "p"}}
    data = files("coe.json", {
        "theta": {"p": "p", "q": "q"},
        "c_H": [{"g": g, "x": x, "h": g} for g in "01" for x in "pq"],
        "c_G": [{"h": g, "y": x, "g": g} for g in "01" for x in "pq"],
        "sigma": swap,
        "rho": swap,
    })
    code, out, _ = run("dyn", "coe", "--data", data)
    assert code == 0 and report(out)["outputs"]["ok"]


def test_suites(run):
    code, out, err = run("suite", "clarkson", "--seed", 7)
    assert code == 0 and report(out)["outputs"]["passed"]
    assert "[PASS]" in err
    code, out, _ = run("suite", "cantor-order", "--depth", 8)
    assert code == 0 and report(out)["outputs"]["passed"]
    code, out, _ = run("suite", "lamperti-roundtrip")
    assert code == 0 and report(out)["outputs"]["passed"]


def test_usage_and_validation_errors(run, files):
    assert run("nonsense")[0] == 64
    assert run("suite", "nonsense")[0] == 64
    assert run("lamperti")[0] == 64
    assert run("opnorm", "--p", 3)[0] == 64
    assert run("opnorm", "--matrix", "/no/such/file.json", "--p", 3)[0] == 2
    m = files("m.json", {"rows": [[1, 0], [0, 1]]})
    code, out, _ = run("opnorm", "--matrix", m, "--p", 0.5)
    assert code == 2 and report(out)["error"]["type"] == "InvalidExponent"
    ragged = files("r.json", {"rows": [[1, 0], [0]]})
    assert run("opnorm", "--matrix", ragged, "--p", 3)[0] == 2
    broken = files("b.json", {"rows": 1})
    assert run("opnorm", "--matrix", broken, "--p", 3)[0] == 2


def test_table_and_flag_positions(run, files):
    m = files("m.json", {"rows": [[0, 1], [1, 0]]})
    code, out, _ = run("lamperti", "classify", "--matrix", m, "--p", 3, "--table", "--seed", 4)
    assert code == 0
    rows = dict(line.split(None, 1) for line in out.strip().splitlines())
    assert rows["seed"] == "4" and rows["outputs.spatial"] == "true"


def test_same_argv_same_bytes(run, files):
    m = files("m.json", {"rows": [[1, [0, 2]], [0.5, -1]]})
    first = run("opnorm", "--matrix", m, "--p", 3, "--seed", 11)[1]
    second = run("opnorm", "--matrix", m, "--p", 3, "--seed", 11)[1]
    assert first == second


def test_module_entry_point(files):
    m = files("m.json", {"rows": [[2, 0], [0, 1]]})
    proc = subprocess.run([sys.executable, "-m", "lpopalg", "opnorm", "--matrix", m, "--p", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["outputs"]["lower_bound"] == pytest.approx(2)
