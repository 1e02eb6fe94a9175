import io
import json
import os
import subprocess
import sys

import pytest

from jungck.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def machine(*argv):
    code, text = run("--format", "machine", *argv)
    doc = json.loads(text)
    assert doc["exit_code"] == code
    return code, doc


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("demo")
    assert run("demo", "--out", str(d))[0] == 0
    return d


def write(tmp_path, doc, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def test_demo_files(demo_dir):
    names = sorted(p.name for p in demo_dir.iterdir())
    assert names == ["constant-s.json", "continuous.json", "harmonic-diagnostic.json",
                     "three-point.json", "violating-pair.json"]
    diag = json.loads((demo_dir / "harmonic-diagnostic.json").read_text())
    assert len(diag["rows"]) == 100 and diag["missing"] == []


def test_solve_continuous(demo_dir):
    code, doc = machine("solve", str(demo_dir / "continuous.json"))
    assert code == 0 and doc["verdict"] == "pass"
    assert abs(doc["trace"]["z"]) <= 1e-10 and len(doc["trace"]["steps"]) <= 40
    assert doc["certified"] is True


def test_solve_three_point_text(demo_dir):
    code, text = run("solve", str(demo_dir / "three-point.json"))
    assert code == 0
    assert "coincidence point u = p0, point of coincidence z = p0" in text
    assert text.rstrip().endswith("verdict: pass (exit 0)")


def test_certify_violating_pair(demo_dir):
    code, doc = machine("certify", str(demo_dir / "violating-pair.json"))
    assert code == 1 and doc["verdict"] == "fail"
    assert doc["certification"]["violations"][0] == {"x": "p0", "y": "p1", "lhs": 1.0, "rhs": 0.2}


def test_oracle_constant_s(demo_dir):
    code, doc = machine("oracle", str(demo_dir / "constant-s.json"))
    assert code == 0
    rep = doc["oracle"]
    assert rep["ea"] and rep["owc"] and rep["common_fixed_points"] == ["p0"]


def test_validate_asymmetric_is_negative(tmp_path):
    path = write(tmp_path, {"space": {"matrix": [[0, 1], [2, 0]]}})
    code, doc = machine("validate", path)
    assert code == 1
    assert [v["axiom"] for v in doc["metric"]["violations"]] == ["symmetry"]


def test_validate_controls(demo_dir):
    code, doc = machine("validate", str(demo_dir / "three-point.json"))
    assert code == 0 and doc["psi_certificate"]["passed"] and doc["control_certificate"]["passed"]


@pytest.mark.parametrize(
    "doc",
    [
        "{not json",
        {"space": {"matrix": [[0, 1]]}},  # ragged
        {"space": {"matrix": [[0, 1], [1, 0]]}, "extra": {}},
        {"space": {"matrix": [[0, 1], [1, 0]]}, "maps": {"S": ["p0", "q"], "T": [0, 1]}},
    ],
)
def test_malformed_input_exit_2(tmp_path, doc):
    path = write(tmp_path, doc)
    cmd = "certify" if isinstance(doc, dict) and "maps" in doc else "validate"
    assert run(cmd, path)[0] == 2


def test_missing_file_and_bad_args(tmp_path):
    assert run("certify", str(tmp_path / "nope.json"))[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["fuzz", "--seeds", "5..1"])
    assert info.value.code == 2
    assert run("fuzz", "--n", "1")[0] == 2


def test_capability_errors(tmp_path, demo_dir):
    assert run("oracle", str(demo_dir / "continuous.json"))[0] == 3
    doc = {
        "space": {"type": "interval", "lower": 0, "upper": 1},
        "maps": {"S": "x/8", "T": "4*x*(1-x)"},
        "solver": {"x0": 0.5},
    }
    assert run("solve", write(tmp_path, doc))[0] == 3


def test_solve_uncertified_without_controls(tmp_path):
    doc = {"space": {"matrix": [[0, 1], [1, 0]]}, "maps": {"S": [0, 0], "T": [0, 1]}, "solver": {"x0": "p1"}}
    code, text = run("solve", write(tmp_path, doc))
    assert code == 0 and "uncertified" in text


@pytest.mark.parametrize("name,cmd", [
    ("three-point.json", "certify"), ("violating-pair.json", "certify"), ("continuous.json", "solve"),
    ("constant-s.json", "oracle"), ("violating-pair.json", "solve"), ("three-point.json", "validate"),
])
def test_text_and_machine_agree(demo_dir, name, cmd):
    extra = ["--max-iter", "20"] if cmd == "solve" else []
    code_t, text = run(cmd, str(demo_dir / name), *extra)
    code_m, doc = machine(cmd, str(demo_dir / name), *extra)
    assert code_t == code_m
    assert text.rstrip().endswith(f"verdict: {doc['verdict']} (exit {code_m})")


def test_fuzz_writes_nothing_without_falsification(tmp_path):
    code, doc = machine("fuzz", "--seeds", "0..9", "--n", "2..4", "--strategy", "random", "--out", str(tmp_path))
    assert code == 0 and doc["reproduction_files"] == [] and doc["instances"] == 10


def _cli(args, workers):
    env = dict(os.environ, JUNGCK_WORKERS=str(workers))
    return subprocess.run([sys.executable, "-m", "jungck", "--format", "machine", *args],
                          capture_output=True, env=env, check=False).stdout


def test_byte_identical_across_workers():
    args = ["fuzz", "--seeds", "0..29", "--n", "2..6", "--strategy", "rejection-certified"]
    one = _cli(args, 1)
    assert one and one == _cli(args, 1) == _cli(args, 3)


def test_byte_identical_certify(demo_dir):
    args = ["certify", str(demo_dir / "continuous.json"), "--samples", "500", "--seed", "4"]
    assert run("--format", "machine", *args) == run("--format", "machine", *args)
