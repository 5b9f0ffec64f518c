import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from rdplocus import cli

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
SCHEMA = cli.load_schema()
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)

EXAMPLE_A = "x*y + x*z^2 + y^2*z - z^6"

# argv, expected exit code
CASES = [
    (["recognize", EXAMPLE_A], 0),
    (["recognize", "x^2 + y^3 + z^4"], 0),
    (["recognize", "x*y + z^40"], 0),
    (["recognize", "x"], 2),
    (["recognize", "x*y +"], 2),
    (["recognize", "x*y - z^3", "--order", "300"], 2),
    (["tjurina", "x*y - z^5", "--degree", "8"], 0),
    (["tjurina", "x*y - z^5", "--degree", "8", "--search"], 0),
    (["tjurina", "x*y - z^5", "--degree", "40"], 2),
    (["factor-xy", "x*y + x^3 + y^4 - x^2*y^2"], 0),
    (["factor-xy", "x*y + z^3"], 2),
    (["root", "4 + x + y*z", "--n", "2"], 0),
    (["root", "2 + x", "--n", "2"], 2),
    (["intersect", "x", "z^2", "y", "z^3", "--check"], 0),
    (["intersect", "x", "y", "x", "y"], 2),
    (["scenario-predict", "Spine{3,2}"], 0),
    (["scenario-predict", "GeneralLines{6}"], 0),
    (["scenario-predict", "Spine{2,2}"], 2),
    (["scenario-crosscheck", "MixedTangency{2,2,3}", "--seed", "2"], 0),
    (["curve-class", EXAMPLE_A, "--curve", "(x, z)"], 0),
    (["curve-class", "x*y - z^3", "--curve", "(x, y)"], 2),
    (["curve-class", "x*y - z^3", "--curve", "(x, z"], 2),
    (["picard", "--input", str(SAMPLES / "grand.json")], 0),
    (["picard", "--input", str(SAMPLES / "lines6.json")], 0),
    (["picard", "--input", "/nonexistent.json"], 2),
]


@pytest.mark.parametrize("argv,code", CASES, ids=[" ".join(a[:2]) for a, _ in CASES])
def test_exit_codes_and_schema(argv, code, capsys):
    assert cli.main(argv + ["--format", "json"]) == code
    out = capsys.readouterr().out
    envelope = json.loads(out)
    VALIDATOR.validate(envelope)
    assert envelope["exit_code"] == code
    assert envelope["command"] == argv[0]


@pytest.mark.parametrize("argv,code", CASES[:3] + CASES[15:17] + CASES[22:23])
def test_text_matches_json(argv, code, capsys):
    cli.main(argv + ["--format", "json"])
    envelope = json.loads(capsys.readouterr().out)
    cli.main(argv)
    text = capsys.readouterr().out.strip().splitlines()
    assert text == cli.flatten(envelope)


def test_error_goes_to_stderr(capsys):
    assert cli.main(["recognize", "x"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error.type: NotDoublePoint" in captured.err


def test_recognize_report():
    code, env, _ = cli.execute(["recognize", EXAMPLE_A])
    res = env["result"]
    assert code == 0 and res["label"] == "A_4" and res["normal_form"] == "x*y + z^5"


def test_mismatch_exit_code(tmp_path, monkeypatch):
    from rdplocus import catalog
    monkeypatch.setattr(catalog, "predict", lambda c: catalog.Prediction("A", 9, 10, {"C": 1}, {"C": 10}))
    code, env, _ = cli.execute(["scenario-crosscheck", "Spine{3,1}", "--format", "json"])
    assert code == 1
    VALIDATOR.validate(env)
    assert env["result"]["mismatches"] == 1


def test_internal_error_exit_code(monkeypatch):
    def boom(args):
        raise AssertionError("broken invariant")
    monkeypatch.setitem(cli.COMMANDS, "recognize", boom)
    code, env, _ = cli.execute(["recognize", "x*y"])
    assert code == 3 and env["error"]["message"] == "broken invariant"
    VALIDATOR.validate(env)


def test_crosscheck_needs_input():
    with pytest.raises(SystemExit):
        cli.execute(["scenario-crosscheck"])


def test_manifest_path(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"order": 20, "seeds": [0, 1],
                             "configs": [{"family": "NoTangency", "params": {"m": 1, "n": 3}}]}))
    assert cli.main(["scenario-crosscheck", "--manifest", str(p), "--format", "json"]) == 0
    env = json.loads(capsys.readouterr().out)
    assert env["result"]["total"] == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rdplocus", "recognize", "x*y - z^3", "--format", "json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["result"]["label"] == "A_2"
