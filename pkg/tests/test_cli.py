import io
import json
import subprocess
import sys

import jsonschema
import pytest

from padicdml.cli import ENVELOPE_SCHEMA, explain, run

FIB = {"type": "linear", "matrix": [[1, 1], [1, 0]], "point": [0, 1], "variety": ["x0"]}
DIAG = {"maps": ["2*t + t^2", "2*t + t^2"], "point": [2, 2], "variety": ["x0 - x1"], "p": 2}
CAT = {"type": "torus", "matrix": [[2, 1], [1, 1]], "point": [2, 3], "variety": ["x0 - 2"]}
LIN = {"p": 3, "map": ["3*x0 + x0^2"], "regime": "attracting", "degree": 12}
NEWTON = {"p": 3, "polynomial": "t^3 - 3*t + 9"}
JORDAN = {"p": 5, "matrix": [[2, 1], [0, 2]]}


def call(argv, stdin_text=""):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, io.StringIO(stdin_text), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(kind, data, *flags):
    code, out, err = call([kind, "-", *flags], json.dumps(data))
    return code, json.loads(out) if out.lstrip().startswith("{") else out, err


# -- examples -----------------------------------------------------------------------

def test_orbit_diagonal():
    code, env, _ = call_json("orbit", DIAG)
    assert code == 0
    assert env["result"]["progressions"] == [{"start": 0, "modulus": 1}]
    assert env["certificate"] == "rigorous"


def test_sml_fibonacci():
    code, env, _ = call_json("sml", FIB)
    assert code == 0
    assert env["result"]["exceptional"] == [0]
    assert env["result"]["prime"] == 11


def test_malformed_json():
    code, out, err = call(["sml", "-"], '{"type": "linear", "matrix": [[1, 1], [1, 0]')
    assert code == 1
    obj = json.loads(out)
    assert obj["exit_code"] == 1
    assert obj["error"]["kind"] == "json"
    assert "pointer" in obj["error"]
    assert err


def test_schema_error_pointer():
    bad = dict(FIB, matrix=[[1, 1], [1, "x"]])
    code, obj, _ = call_json("sml", bad)
    assert code == 1
    assert obj["error"]["pointer"] == "/matrix/1/1"


def test_unknown_field_strict_and_lenient():
    extra = dict(FIB, colour="blue")
    code, obj, _ = call_json("sml", extra)
    assert code == 1 and obj["error"]["kind"] == "schema"
    code, env, _ = call_json("sml", extra, "--lenient")
    assert code == 0


def test_polynomial_parse_error_pointer():
    code, obj, _ = call_json("sml", dict(FIB, variety=["x0 +* 2"]))
    assert code == 1
    assert obj["error"]["pointer"] == "/variety/0"


def test_missing_file(tmp_path):
    code, out, _ = call(["sml", str(tmp_path / "nope.json")])
    assert code == 1
    assert json.loads(out)["error"]["kind"] == "io"


def test_unknown_subcommand():
    code, out, _ = call(["frobnicate", "-"])
    assert code == 1
    assert json.loads(out)["error"]["kind"] == "usage"


def test_no_strategy_exit_two():
    data = {"maps": ["t + 1"], "point": [0], "variety": ["x0 - 3"], "strategy": "attracting"}
    code, obj, _ = call_json("orbit", data)
    assert code == 2
    assert obj["error"]["kind"] == "AllStrategiesFailed"
    assert "diagnostics" in obj["error"]


def test_file_input(tmp_path):
    f = tmp_path / "fib.json"
    f.write_text(json.dumps(FIB))
    code, out, _ = call(["sml", str(f)])
    assert code == 0 and json.loads(out)["result"]["exceptional"] == [0]


def test_flags_override_file():
    code, env, _ = call_json("sml", dict(FIB, prime=19), "--precision", "48")
    assert env["result"]["prime"] == 19
    assert env["result"]["parameters"]["N"] == 48
    code, env, _ = call_json("sml", FIB, "--prime", "29")
    assert env["result"]["prime"] == 29


def test_timing_only_on_request():
    _, env, err = call_json("sml", FIB)
    assert "timing" not in env and "finished" in err
    _, env, _ = call_json("sml", FIB, "--timing")
    assert "seconds" in env["timing"]


def test_other_subcommands():
    code, env, _ = call_json("linearize", LIN)
    assert code == 0 and env["result"]["residual"]["passes"]
    code, env, _ = call_json("newton", NEWTON)
    assert code == 0 and env["result"]["strassman_T"] == 3
    code, env, _ = call_json("jordan", JORDAN)
    assert code == 0 and env["result"]["d"] == 4 and env["result"]["consistency"]["holds"]
    code, env, _ = call_json("sml", CAT)
    assert code == 0 and env["result"]["exceptional"] == [0]


def test_torus_rejects_fractional_exponent():
    code, obj, _ = call_json("sml", dict(CAT, matrix=[[2, "1/2"], [1, 1]]))
    assert code == 1 and obj["error"]["pointer"] == "/matrix/0/1"


# -- explain --------------------------------------------------------------------------

def test_explain_attracting_pathway():
    _, env, _ = call_json("orbit", DIAG)
    text = explain(env)
    assert "attracting" in text
    assert "prime p = 2" in text and "N0 = " in text


def test_explain_indifferent_caveat():
    data = {"maps": ["3*t"], "point": [7], "variety": ["x0 - 1701"], "p": 7, "strategy": "indifferent"}
    code, env, _ = call_json("orbit", data)
    assert code == 0 and env["certificate"] == "heuristic"
    text = explain(env)
    assert "linear forms in p-adic logarithms" in text


def test_explain_brute_force_window():
    data = {"maps": ["t + 1"], "point": [0], "variety": ["x0 - 3"], "options": {"n_max": 300}}
    code, env, _ = call_json("orbit", data)
    assert env["certificate"] == "brute-force-only"
    assert "[0, 300)" in explain(env)


def test_explain_subcommand_and_flag():
    _, env, _ = call_json("sml", FIB)
    code, text, _ = call(["explain", "-"], json.dumps(env))
    assert code == 0 and "prime p = 11" in text
    code, text2, _ = call(["sml", "-", "--explain"], json.dumps(FIB))
    assert code == 0 and text2 == text


def test_explain_rejects_bad_envelope():
    code, out, _ = call(["explain", "-"], json.dumps({"tool": "padicdml"}))
    assert code == 1


# -- round trip and determinism --------------------------------------------------------

@pytest.mark.parametrize(
    "kind,data",
    [("sml", FIB), ("sml", CAT), ("orbit", DIAG), ("linearize", LIN), ("newton", NEWTON), ("jordan", JORDAN)],
)
def test_round_trip_and_determinism(kind, data):
    code1, out1, _ = call([kind, "-"], json.dumps(data))
    code2, out2, _ = call([kind, "-"], json.dumps(data))
    assert code1 == code2 == 0
    assert out1 == out2
    env = json.loads(out1)
    jsonschema.validate(env, ENVELOPE_SCHEMA)
    assert json.loads(json.dumps(env)) == env


def test_hash_tracks_effective_options():
    _, a, _ = call_json("sml", FIB)
    _, b, _ = call_json("sml", FIB, "--precision", "48")
    _, c, _ = call_json("sml", FIB, "--precision", "48")
    assert a["input_sha256"] != b["input_sha256"]
    assert b["input_sha256"] == c["input_sha256"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "padicdml", "sml", "-"], input=json.dumps(FIB),
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["exceptional"] == [0]
