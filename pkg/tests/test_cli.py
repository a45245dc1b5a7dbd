import csv
import json
import os
import subprocess
import sys

import pytest

from inflap.cli import EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, dumps, main, write_atomic
from inflap.fixtures import FUNCTIONS, g3
from inflap.graph import graph_to_dict, validate_graph


@pytest.fixture
def fx(tmp_path):
    for name in ("g1", "g2", "g3"):
        assert main(["fixtures", name, "--out", str(tmp_path)]) == 0
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fixture_files(fx):
    names = sorted(p.name for p in fx.iterdir())
    assert names == sorted(["g1.json", "g2.json", "g3.json"] + [f"{s}.json" for s in FUNCTIONS])
    raw = json.loads((fx / "g3.json").read_text())
    assert validate_graph(raw) == g3()
    assert json.loads((fx / "g3_f2.json").read_text())["Lambda"] == 6.0


def test_unknown_fixture(tmp_path, capsys):
    code, _, err = run(capsys, "fixtures", "g9", "--out", tmp_path)
    assert code == EXIT_INPUT and "UnknownFixture" in err


def test_validate(fx, capsys):
    code, out, _ = run(capsys, "validate", "--graph", fx / "g1.json")
    assert code == EXIT_OK and json.loads(out)["interior"] == 5


def test_invalid_graph(tmp_path, capsys):
    raw = graph_to_dict(g3())
    raw["edges"][1]["weight"] = 0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(raw))
    code, _, err = run(capsys, "validate", "--graph", p)
    assert code == EXIT_INPUT and "NonpositiveWeight" in err


def test_missing_file_and_bad_flag(tmp_path, capsys):
    assert run(capsys, "validate", "--graph", tmp_path / "nope.json")[0] == EXIT_INPUT
    with pytest.raises(SystemExit) as info:
        main(["packing", "--graph", "x.json", "--k", "two"])
    assert info.value.code == EXIT_INPUT


def test_distances(fx, capsys):
    code, out, _ = run(capsys, "distances", "--graph", fx / "g2.json")
    rep = json.loads(out)
    assert code == 0 and rep["boundary_distance"] == {"u1": 1 / 3, "u2": 1 / 2}


def test_packing_g3(fx, capsys):
    code, out, _ = run(capsys, "packing", "--graph", fx / "g3.json", "--k", 2)
    rep = json.loads(out)
    assert code == 0 and rep["centers"] == ["u2", "u3"]
    assert rep["radius"] == pytest.approx(1 / 6, abs=1e-15)
    assert run(capsys, "packing", "--graph", fx / "g3.json", "--k", 3)[0] == EXIT_INPUT


def test_check_limit(fx, capsys):
    code, out, _ = run(capsys, "check-limit", "--graph", fx / "g1.json", "--function", fx / "g1_f.json",
                       "--lambda", 1)
    assert code == EXIT_OK and json.loads(out)["overall"]
    code, out, _ = run(capsys, "check-limit", "--graph", fx / "g2.json", "--function", fx / "g2_dB.json",
                       "--lambda", 2)
    rep = json.loads(out)
    assert code == EXIT_VERIFY and rep["failing"] == ["u1"]


def test_check_limit_fraction_lambda(fx, capsys):
    code, _, _ = run(capsys, "check-limit", "--graph", fx / "g3.json", "--function", fx / "g3_f1.json",
                     "--lambda", "6/5")
    assert code == EXIT_OK


def test_check_generalized(fx, capsys):
    code, out, _ = run(capsys, "check-generalized", "--graph", fx / "g3.json", "--function",
                       fx / "g3_f.json", "--lambda", 2)
    rep = json.loads(out)
    assert code == EXIT_OK and rep["eigenpair"] and rep["support_check"]["passed"]
    assert rep["densities"]["mu"] == {"u2": 0.0, "u3": 2.0}
    code, out, _ = run(capsys, "check-generalized", "--graph", fx / "g3.json", "--function",
                       fx / "g3_f1.json", "--lambda", 1)
    assert code == EXIT_VERIFY and not json.loads(out)["eigenpair"]


def test_bounds(fx, capsys):
    code, out, _ = run(capsys, "bounds", "--graph", fx / "g3.json", "--kmax", 2)
    b = json.loads(out)["bounds"]
    assert code == 0 and [x["bound"] for x in b] == pytest.approx([6 / 5, 6.0])


def test_split(fx, capsys):
    code, out, _ = run(capsys, "split", "--graph", fx / "g3.json", "--function", fx / "g3_f2.json")
    rep = json.loads(out)
    assert code == 0
    assert "z:u2:u3" in json.dumps(rep)


def test_sweep_csv(fx, capsys):
    code, out, _ = run(capsys, "sweep", "--graph", fx / "g3.json", "--pmax", 16)
    rows = list(csv.reader(out.splitlines()))
    assert code == EXIT_OK
    assert rows[0] == ["p", "lambda", "lambda_root", "residual", "iterations"]
    assert [float(r[0]) for r in rows[1:]] == [2, 4, 8, 16]
    # repr floats survive a text round trip
    assert all(repr(float(x)) == x for r in rows[1:] for x in r[:4])


def test_sweep_non_convergence_exit(fx, capsys):
    code, out, _ = run(capsys, "sweep", "--graph", fx / "g3.json", "--pmax", 8, "--tol", "1e-30")
    assert code == EXIT_SOLVER
    assert len(out.splitlines()) >= 2


def test_deterministic_bytes(fx):
    outs = []
    for i in range(2):
        target = fx / f"rep{i}.json"
        assert main(["check-generalized", "--graph", str(fx / "g3.json"), "--function",
                     str(fx / "g3_f1.json"), "--lambda", "6/5", "--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_round_trip_exact(tmp_path):
    vals = {"values": {"u2": 0.1 + 0.2, "u3": 1 / 3}, "x": float("inf")}
    p = tmp_path / "v.json"
    write_atomic(p, dumps(vals))
    back = json.loads(p.read_text())
    assert back["values"] == vals["values"] and back["x"] is None


def test_atomic_write_leaves_no_temp_files(tmp_path):
    p = tmp_path / "sub" / "out.json"
    write_atomic(p, "a")
    write_atomic(p, "b")
    assert p.read_text() == "b" and os.listdir(p.parent) == ["out.json"]


def test_module_entry_point(fx):
    proc = subprocess.run([sys.executable, "-m", "inflap", "validate", "--graph", str(fx / "g2.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["valid"]
