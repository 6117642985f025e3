import json

import numpy as np
import pytest

from dbo.cli import main
from dbo.lattice import WeightedSequence
from dbo.symbols import smooth_bracket_power
from dbo.tensors import (DenseTruncated, MultiplicationType, diagonal_indicator, theta_two)


def dump(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(0)
    f = WeightedSequence([-2], rng.standard_normal(5) + 0j)
    return {
        "diag": dump(tmp_path / "diag.json", diagonal_indicator(1).spec()),
        "dense": dump(tmp_path / "dense.json", DenseTruncated.random(1, 4, rng, band=3).spec()),
        "theta2": dump(tmp_path / "theta2.json", theta_two(smooth_bracket_power(1, -6)).spec()),
        "thetaV": dump(tmp_path / "thetaV.json",
                       MultiplicationType(WeightedSequence.delta((0,))).spec()),
        "f": dump(tmp_path / "f.json", f.to_json_obj()),
        "delta": dump(tmp_path / "delta.json", WeightedSequence.delta((0,)).to_json_obj()),
        "dir": tmp_path,
    }


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_apply_writes_sequence(files, capsys):
    out = files["dir"] / "out.json"
    code, _, _ = run(["apply", "--tensor", files["diag"], "--f", files["delta"], "--g",
                      files["delta"], "--out-radius", "8", "--out", str(out)], capsys)
    assert code == 0
    seq = WeightedSequence.from_json_obj(json.loads(out.read_text()))
    assert seq.at((0,)) == 1 and np.count_nonzero(seq.flat()) == 1


def test_norm_and_seminorm_reports(files, capsys):
    code, text, _ = run(["norm", "--tensor", files["diag"], "--N", "2", "--radius", "4"], capsys)
    rep = json.loads(text)
    assert code == 0 and rep["value"] == 1.0 and rep["argmax"] == [[0], [0], [0]]
    for key in ("kind", "params", "value", "argmax", "radius", "boundaryRatio", "verdict",
                "witness", "config"):
        assert key in rep
    assert rep["config"]["N"] == 2.0 and rep["config"]["stability"] == 0.1
    code, text, _ = run(["seminorm", "--tensor", files["dense"], "--alpha", "1", "--beta", "-1",
                         "--omega", "1", "--N", "2", "--radius", "4"], capsys)
    assert code == 0 and json.loads(text)["params"] == {"alpha": [1], "beta": [-1]}


def test_mixed_norm(files, capsys):
    code, text, _ = run(["mixed-norm", "--tensor", files["diag"], "--p", "2", "--q", "inf",
                         "--radius", "2", "--all-orderings"], capsys)
    rep = json.loads(text)
    assert code == 0 and rep["value"] == 1.0 and len(rep["details"]["orderings"]) == 6


def test_verify_bound_pass_and_unmet(files, capsys):
    args = ["verify-bound", "--tensor", files["dense"], "--p", "2", "--q", "2", "--s1", "0",
            "--s2", "0", "--omega", "0", "--radius", "4", "--samples", "50", "--seed", "42"]
    code, text, _ = run(args + ["--N", "3"], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "pass"
    code, text, _ = run(args + ["--N", "1"], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "hypothesis-unmet"


def test_witness_violation_exits_one(files, capsys):
    code, text, _ = run(["witness", "--tensor", files["thetaV"], "--omega", "0", "--N", "2",
                         "--rmax", "64"], capsys)
    rep = json.loads(text)
    assert code == 1 and rep["verdict"] == "violation" and rep["witness"]["ray"] == "j = 2k = 2l"


def test_bt_check_and_lemma_x(files, capsys):
    code, text, _ = run(["bt-check", "--tensor", files["theta2"], "--N", "2", "--radius", "8",
                         "--alpha-max", "1", "--beta-max", "1"], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "consistent-with-membership"
    phi = json.dumps({"name": "monomial", "a": [1], "b": [0]})
    code, text, _ = run(["lemma-x", "--phi", phi, "--N", "2", "--radius", "8"], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "consistent-with-membership"


def test_compactness_with_csv(files, capsys):
    csv = files["dir"] / "tail.csv"
    code, text, _ = run(["verify-compactness", "--tensor", files["theta2"], "--b", files["delta"],
                         "--p", "2", "--q", "2", "--N", "3", "--radius", "16", "--samples", "20",
                         "--csv", str(csv)], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "pass"
    lines = csv.read_text().splitlines()
    assert lines[0] == "j0,tail" and len(lines) == 18


def test_bridge(files, capsys):
    rng = np.random.default_rng(1)
    F = dump(files["dir"] / "F.json",
             WeightedSequence([-3], rng.standard_normal(7) + 1j * rng.standard_normal(7)).to_json_obj())
    G = dump(files["dir"] / "G.json", WeightedSequence([-3], rng.standard_normal(7) + 0j).to_json_obj())
    mono = dump(files["dir"] / "mono.json", {"d": 1, "family": "ConvolutionType",
                                             "params": {"mode": "monomial", "a": [1], "b": [2]}})
    code, text, _ = run(["bridge", "--tensor", mono, "--F", F, "--G", G], capsys)
    assert code == 0 and json.loads(text)["verdict"] == "pass"
    code, _, err = run(["bridge", "--tensor", mono, "--F", F, "--G", G, "--n", "8"], capsys)
    assert code == 2 and "need n >=" in err


def test_malformed_json_reports_position(files, capsys):
    bad = files["dir"] / "bad.json"
    bad.write_text('{"d": 1,\n  "family": "DenseTruncated",\n  "params": {,}}')
    code, _, err = run(["norm", "--tensor", str(bad), "--N", "2", "--radius", "3"], capsys)
    assert code == 2 and "line 3, column 14" in err


def test_usage_errors_exit_two(files, capsys):
    assert run(["norm", "--tensor", files["diag"], "--radius", "3"], capsys)[0] == 2
    assert run(["norm", "--tensor", files["diag"], "--N", "2", "--radius", "0"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["norm", "--tensor", str(files["dir"] / "missing.json"), "--N", "2",
                "--radius", "3"], capsys)[0] == 2
    unknown = dump(files["dir"] / "u.json", {"d": 1, "family": "Nope", "params": {}})
    assert run(["norm", "--tensor", unknown, "--N", "2", "--radius", "3"], capsys)[0] == 2


def test_reports_are_byte_identical_across_threads(files, capsys):
    outs = []
    for threads in ("1", "2", "8", "1"):
        path = files["dir"] / f"rep{len(outs)}.json"
        code, _, _ = run(["verify-bound", "--tensor", files["dense"], "--p", "2", "--q", "2",
                          "--N", "3", "--radius", "4", "--samples", "30", "--seed", "7",
                          "--threads", threads, "--out", str(path)], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert all(o == outs[0] for o in outs[1:])
