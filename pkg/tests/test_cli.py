import json
import subprocess
import sys

import pytest

from centra.cli import main
from centra.exactla import Rational
from centra.polyalg import parse_poly
from centra.superposition import ExpPoly, vec_from_json

DIAG12 = [[["1", "0"], ["0", "2"]]]
PAIR = [[["-1", "0", "0"], ["0", "2", "0"], ["0", "0", "3"]],
        [["-1", "0", "0"], ["0", "-1", "0"], ["0", "0", "0"]]]
ROT = [[["0", "-1"], ["1", "0"]]]


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="problem.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, json.loads(out) if out else None, json.loads(err) if err else None


def test_centralizer(write, capsys):
    code, rep, _ = run(capsys, "centralizer", write({"dimension": 2, "generators": DIAG12}), "--max-degree", "4")
    assert code == 0
    assert rep["dimensions"] == [2, 1, 0, 0]
    assert rep["bases"]["2"] == [["0", "x1^2"]]
    assert rep["closure_check"]["violations"] == []
    assert rep["algebra"]["dimension"] == 1 and rep["algebra"]["solvable"]


def test_invariants_and_lattice(write, capsys):
    code, rep, _ = run(capsys, "invariants", write({"dimension": 2, "generators": [[["1", "0"], ["0", "-1"]]]}),
                       "--max-degree", "4")
    assert code == 0
    assert rep["invariants"] == {"1": [], "2": ["x1*x2"], "3": [], "4": ["x1^2*x2^2"]}
    assert rep["resonance_lattice"]["primitive_generator"] == [1, 1]
    code, rep, _ = run(capsys, "invariants", write({"dimension": 2, "generators": ROT}),
                       "--max-degree", "2", "--alpha", "0")
    assert rep["relative_invariants"] == {"1": [], "2": ["x1^2 + x2^2"]}


def test_invariants_perfect_note(write, capsys):
    sl2 = [[["0", "1"], ["0", "0"]], [["0", "0"], ["1", "0"]]]
    code, rep, _ = run(capsys, "invariants", write({"dimension": 2, "generators": sl2}),
                       "--max-degree", "2", "--alpha", "1,0,0")
    assert code == 0 and "perfect" in rep["note"]


def test_finiteness_and_verify(write, capsys, tmp_path):
    problem = write({"dimension": 3, "generators": PAIR})
    out = str(tmp_path / "fin.json")
    code, _, _ = run(capsys, "finiteness", problem, "--output", out)
    assert code == 0
    saved = json.loads(open(out).read())
    assert saved["verdict"] == "FiniteCertified"
    assert saved["certificate"]["combination"] == ["-1", "2"]
    assert saved["certificate"]["diagonal"] == ["-1", "-4", "-3"]
    assert saved["certificate"]["nilpotency"]["violations"] == []
    code, rep, _ = run(capsys, "verify", problem, "--report", out)
    assert code == 0 and rep["ok"] and rep["checks"] == {"combination_matches": True, "same_sign": True}


def test_finiteness_infinite_verify(write, capsys, tmp_path):
    problem = write({"dimension": 2, "generators": ROT})
    out = str(tmp_path / "fin.json")
    assert main(["finiteness", problem, "--output", out, "--max-degree", "4"]) == 0
    saved = json.loads(open(out).read())
    assert saved["verdict"] == "InfiniteCertified"
    assert parse_poly(saved["certificate"]["witness"], 2) == parse_poly("x1^2 + x2^2", 2)
    code, rep, _ = run(capsys, "verify", problem, "--report", out)
    assert code == 0 and rep["checks"] == {"witness_certificate": True}


def test_solve_field_round_trip(write, capsys, tmp_path):
    problem = write({"dimension": 2, "generators": DIAG12, "field": ["x1", "2*x2 + x1^2"],
                     "options": {"max_degree": 4}})
    out = str(tmp_path / "sol.json")
    code, _, _ = run(capsys, "solve", problem, "--y0", "1,2", "--verify", "1", "1000", "--output", out)
    assert code == 0
    saved = json.loads(open(out).read())
    assert saved["exact_residual_zero"] and saved["numeric"]["ok"]
    assert saved["initial_value"] == ["1", "2"]
    x = vec_from_json(saved["solution"], 2)
    assert x[0] == ExpPoly.term(Rational(1), 0, Rational(1))
    assert x[1] == ExpPoly.term(Rational(2), 0, Rational(2)) + ExpPoly.term(Rational(1), 1, Rational(2))
    code, rep, _ = run(capsys, "verify", problem, "--report", out, "--y0", "1,2")
    assert code == 0 and rep["ok"] and rep["checks"]["initial_value"]


def test_verify_detects_tampering(write, capsys, tmp_path):
    problem = write({"dimension": 2, "generators": DIAG12, "field": ["x1", "2*x2 + x1^2"]})
    out = tmp_path / "sol.json"
    assert main(["solve", problem, "--y0", "1,2", "--output", str(out)]) == 0
    saved = json.loads(out.read_text())
    saved["solution"][0]["coeff"][0] = "3"
    out.write_text(json.dumps(saved))
    code, rep, _ = run(capsys, "verify", problem, "--report", str(out))
    assert code == 1 and rep["ok"] is False and rep["checks"]["exact_residual_zero"] is False


def test_solve_system(write, capsys):
    doc = {"dimension": 2, "generators": DIAG12,
           "system": {"seeds": [["0", "x1^2"]], "coefficients": [{"sigma": ["1"], "alpha": "0"}]},
           "options": {"y0": ["1", "0"]}}
    code, rep, _ = run(capsys, "solve", write(doc), "--verify", "1", "1000")
    assert code == 0
    assert rep["mode"] == "system" and rep["polynomial_in_t"] and rep["exact_residual_zero"]
    assert rep["solution"] == [{"lambda": "0", "k": 0, "coeff": ["1", "0"]},
                               {"lambda": "0", "k": 1, "coeff": ["0", "1"]}]


def test_normal_form(write, capsys):
    doc = {"dimension": 3, "generators": PAIR, "symmetry": PAIR[0],
           "field": ["-x1", "-x2 + 2/3*x1*x3", "x1*x2^2"], "options": {"max_degree": 5}}
    code, rep, _ = run(capsys, "normal-form", write(doc))
    assert code == 0
    assert rep["normal_form"]["nonlinear"] == {"2": ["0", "2/3*x1*x3", "0"]}
    assert rep["steps"][0]["resonant_basis"] == [["0", "x1*x3", "0"]]
    code, rep2, _ = run(capsys, "normal-form", write(doc), "--symmetry=-1,2,3")
    assert rep2 == rep


def test_output_is_deterministic(write, capsys):
    problem = write({"dimension": 3, "generators": PAIR})
    main(["centralizer", problem, "--max-degree", "4"])
    first = capsys.readouterr().out
    main(["centralizer", problem, "--max-degree", "4"])
    assert capsys.readouterr().out == first


@pytest.mark.parametrize("doc, kind", [
    ("{not json", "parse"),
    ({"dimension": 2}, "parse"),
    ({"dimension": 2, "generators": [[["1"]]]}, "parse"),
    ({"dimension": 2, "generators": [[["1", "x"], ["0", "1"]]]}, "parse"),
])
def test_parse_errors(write, capsys, doc, kind):
    code, out, err = run(capsys, "centralizer", write(doc))
    assert code == 2 and out is None and err["error"] == kind


def test_validation_error(write, capsys):
    doc = {"dimension": 2, "generators": DIAG12,
           "system": {"seeds": [["x1^2", "0"]], "coefficients": [{"sigma": ["1"]}]}}
    code, _, err = run(capsys, "solve", write(doc), "--y0", "1,0")
    assert code == 2 and err["error"] == "validation"


def test_cap_exceeded(write, capsys):
    sl2 = [[["0", "1"], ["0", "0"]], [["0", "0"], ["1", "0"]]]
    code, _, err = run(capsys, "centralizer", write({"dimension": 2, "generators": sl2}), "--cap", "2")
    assert code == 3 and err["error"] == "cap_exceeded"


def test_unsupported(write, capsys):
    doc = {"dimension": 2, "generators": ROT, "field": ["-x2", "x1"]}
    code, _, err = run(capsys, "solve", write(doc), "--y0", "1,0")
    assert code == 4 and err["error"] == "unsupported"
    code, _, err = run(capsys, "normal-form", write(doc))
    assert code == 4


def test_console_entry_point(write):
    problem = write({"dimension": 2, "generators": DIAG12})
    proc = subprocess.run([sys.executable, "-m", "centra.cli", "centralizer", problem, "--max-degree", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dimensions"] == [2, 1]


def test_zero_algebra_notes_constants(write, capsys):
    zero = [[["0", "0"], ["0", "0"]]]
    code, rep, _ = run(capsys, "centralizer", write({"dimension": 2, "generators": zero}), "--max-degree", "1")
    assert code == 0
    assert rep["algebra"]["dimension"] == 0
    assert rep["constant_fields"] == 2 and rep["dimensions"] == [4]


def test_mixed_sign_pair_undetermined(write, capsys, tmp_path):
    # no combination has one sign, and the only invariant monomial x1*x2^7 has degree 8
    pair = [[["7", "0", "0"], ["0", "-1", "0"], ["0", "0", "0"]],
            [["0", "0", "0"], ["0", "0", "0"], ["0", "0", "1"]]]
    problem = write({"dimension": 3, "generators": pair})
    out = str(tmp_path / "fin.json")
    assert main(["finiteness", problem, "--output", out]) == 0
    saved = json.loads(open(out).read())
    assert saved["verdict"] == "Undetermined" and saved["searched_bound"] == 6
    code, rep, _ = run(capsys, "verify", problem, "--report", out)
    assert code == 0 and rep["checks"] == {"nothing_certified": True}
    assert main(["finiteness", problem, "--max-degree", "8", "--output", out]) == 0
    assert json.loads(open(out).read())["verdict"] == "InfiniteCertified"
