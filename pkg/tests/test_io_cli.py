import json

import numpy as np
import pytest

from surfacereps import io as sio
from surfacereps.cli import main, run
from surfacereps.decomp import sample_decomposable
from surfacereps.io import SchemaError
from surfacereps.liecore import ClassSpec


def test_matrix_roundtrip(rng):
    from surfacereps.liecore import haar_sample
    u = haar_sample(3, rng)
    assert np.array_equal(sio.matrix_from_json(sio.matrix_to_json(u)), u)


def test_malformed_matrix():
    bad = {"n": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}
    with pytest.raises(SchemaError, match=r"\$\.re\[1\]"):
        sio.matrix_from_json(bad)
    with pytest.raises(SchemaError, match="missing field"):
        sio.matrix_from_json({"n": 2, "re": [[1, 0], [0, 1]]})
    with pytest.raises(SchemaError, match="not unitary"):
        sio.matrix_from_json({"n": 1, "re": [[2]], "im": [[0]]})


def test_tuple_roundtrip(rng):
    x, wit = sample_decomposable(2, 1, 2, rng)
    y = sio.tuple_from_json(json.loads(json.dumps(sio.tuple_to_json(x))))
    assert all(np.array_equal(p, q) for p, q in zip(x.slots(), y.slots()))
    w = sio.witness_from_json(sio.witness_to_json(wit))
    assert np.array_equal(w.phi, wit.phi)


def test_specs_and_instances():
    specs = sio.specs_from_json({"classes": [{"n": 2, "group": "SU", "phases": [0.5, -0.5]}]})
    assert specs == [ClassSpec.su2(0.5)]
    with pytest.raises(SchemaError, match=r"lambdas\[1\]"):
        sio.instance_from_json({"n": 2, "lambdas": [[0.1, 0.2], [0.3]]})


def test_cli_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"g": 0, "l": 1, "pairs": [],
                               "classes": [{"n": 2, "re": [[1, 0], [0]], "im": [[0, 0], [0, 0]]}]}))
    assert main(["analyze", "isotropy", "--input", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "$.classes[0].re[1]" in err


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "schema" in capsys.readouterr().out


def test_cli_verify_examples(capsys):
    assert main(["verify", "symbolic", "--all-upto", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["checks"]) == 3 * 15 and all(c["verdict"] == "pass" for c in rep["checks"])
    assert main(["verify", "numeric", "--n", "2", "--g", "1", "--l", "1",
                 "--samples", "50", "--seed", "7"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["payload"]["seed"] == 7 and rep["payload"]["samples"] == 50


def test_cli_tolerance_overrides(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "tol.json"
    cfg.write_text(json.dumps({"tolerances": {"beta": 1e-30}}))
    monkeypatch.setenv("SURFACEREPS_CONFIG", str(cfg))
    args = ["verify", "numeric", "--n", "3", "--g", "1", "--l", "1", "--samples", "3", "--seed", "1"]
    assert main(args) == 1
    capsys.readouterr()
    assert main(["--set", "beta=1e-9"] + args) == 0
    with pytest.raises(KeyError):
        run(["--set", "nonsense=1"] + args)


def test_cli_none_found(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps([{"group": "SU", "phases": [t, -t]} for t in (0.1, 0.1, 3.0)]))
    assert main(["find", "--classes", str(spec), "--seed", "0", "--restarts", "2"]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["checks"][0]["verdict"] == "none-found"
    assert main(["--allow-none", "find", "--classes", str(spec), "--seed", "0",
                 "--restarts", "2"]) == 0


def test_polytope_csv(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps([{"group": "SU", "phases": [t, -t]} for t in (0.3, 1.2)]))
    out = tmp_path / "c.csv"
    assert main(["polytope", "sample", "--classes", str(spec), "--samples", "500",
                 "--source", "beta", "--seed", "4", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# count: 500")
    header = [l for l in lines if not l.startswith("#")]
    assert header[0] == "angle" and len(header) == 501
