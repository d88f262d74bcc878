from __future__ import annotations

import json
import subprocess
import sys
from importlib import resources

import pytest

from qmult.cli import COMMANDS, main, run
from qmult.fields import GF
from qmult.quiver import QuiverWithMult
from qmult.rep import point_dict, random_point
from qmult.serialize import fixture, parse_point

KRON = str(resources.files("qmult").joinpath("data", "kronecker-2-3.json"))


def _point_file(tmp_path, rng, name="x.json"):
    x = random_point(fixture("kronecker-2-3"), (1, 1), GF(2), rng)
    path = tmp_path / name
    path.write_text(json.dumps(point_dict(x)))
    return x, str(path)


def test_command_set():
    assert set(COMMANDS) == {
        "constants", "euler", "truncate", "iota", "act", "stability", "polystable", "framed",
        "stabilizers", "assumption-u", "moment", "fiber", "grading-weights", "limit", "unfold",
        "census", "fit",
    }  # fmt: skip


def test_euler():
    code, body = run(["euler", KRON, "--rank", "1,1"])
    assert code == 0 and body["euler"] == -7 and body["schema"] == "qmult.euler/1"


def test_census_fixture():
    code, body = run(["census", KRON, "--rank", "1,1", "--theta", "-1,1", "--field", "Fp:2"])
    assert code == 0 and body["moduli"] == 384


def test_census_q_list():
    code, body = run(["census", KRON, "--rank", "1,1", "--theta", "-1,1", "--q-list", "2,3", "--method", "factored"])
    assert [r["moduli"] for r in body["reports"]] == [384, 8748]


def test_fit():
    code, body = run(["fit", "--points", "2:5,3:10,5:26", "--degree", "2"])
    assert code == 0 and body["coefficients"] == [1, 0, 1]


def test_truncate_and_roundtrip(tmp_path, rng, capsys):
    x, path = _point_file(tmp_path, rng)
    code, body = run(["truncate", KRON, path])
    assert code == 0 and set(body["classical"]["arrows"]) == {"a", "b"}
    code, body = run(["act", KRON, path, "--group", _identity(tmp_path)])
    assert parse_point(x.quiver, GF(2), body["point"]) == x
    code, body = run(["unfold", KRON])
    assert QuiverWithMult.from_dict(body["quiver"]).to_dict() == body["quiver"]
    assert body["lossless"] is False


def _identity(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"vertices": {"1": [[[1]], [[0]]], "2": [[[1]], [[0]], [[0]]]}}))
    return str(path)


def test_determinism(tmp_path, rng):
    _, path = _point_file(tmp_path, rng)
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.json"
        assert main(["stability", KRON, path, "--theta", "-1,1", "--out", str(out), "--timing"]) == 0
        body = json.loads(out.read_text())
        assert "timing_seconds" in body
        del body["timing_seconds"]
        outs.append(json.dumps(body, sort_keys=True))
    assert outs[0] == outs[1]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["grading-weights", KRON, "--out", str(a)])
    main(["grading-weights", KRON, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(tmp_path):
    assert run(["census", KRON, "--rank", "1,1", "--theta", "-1,1", "--method", "exhaustive", "--guard", "10"])[0] == 2
    assert run(["unfold", KRON, "--field", "Fp:2", str(_zero_point(tmp_path))])[0] == 2
    assert run(["euler", str(tmp_path / "missing.json"), "--rank", "1,1"])[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["euler", str(bad), "--rank", "1,1"])[0] == 1
    assert run(["euler", KRON])[0] == 1
    assert run(["no-such-command"])[0] == 1
    assert run(["fit", "--points", "2:5"])[0] == 2


def _zero_point(tmp_path):
    path = tmp_path / "z.json"
    path.write_text(json.dumps({"rank": {"1": 1, "2": 1}, "arrows": {
        "a": {"blocks": [[[0, 0]], [[0, 0]]]}, "b": {"blocks": [[[0, 0]], [[0, 0]]]}}}))  # fmt: skip
    return path


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"rank": {"1": 1, "2": 1}, "arrows": {}, "extra": 1}))
    assert run(["truncate", KRON, str(path)])[0] == 1


@pytest.mark.parametrize("cmd", ["constants", "grading-weights", "unfold"])
def test_schema_field(cmd):
    code, body = run([cmd, KRON])
    assert code == 0 and body["schema"] == f"qmult.{cmd}/1"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qmult", "euler", KRON, "--rank", "1,1"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["euler"] == -7
