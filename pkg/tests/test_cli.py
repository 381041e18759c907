import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from bvhier.cli import dumps, main, run

DATA = Path(__file__).resolve().parent.parent / "data"
KDV = str(DATA / "phase_kdv.json")
BROKEN = str(DATA / "broken_table.json")
METRIC = str(DATA / "metric_1.json")
CUBIC = "1/6 * b[0][0] * b[0][0] * b[0][0]"
GRADIENT = "1/2 * d^1(b[0][0]) * d^1(b[0][0])"


def power(n):
    return f"1/{math.factorial(n)} * " + " * ".join(["b[0][0]"] * n)


@pytest.fixture(scope="module")
def broken_reports():
    mc, mc_code = run(["mc-check", BROKEN])
    trr, trr_code = run(["trr-check", BROKEN])
    return mc, mc_code, trr, trr_code


def test_hamiltonians_kdv():
    report, code = run(["hamiltonians", KDV, "--max-level", "8"])
    assert code == 0 and report["verdict"] == "PASS"
    assert [h["k"] for h in report["hamiltonians"]] == list(range(9))
    for h in report["hamiltonians"]:
        assert h["density"] == power(h["k"] + 2)
    assert report["residuals"]["stationary_bracket"]["zero"]


def test_commute_kdv_matrix_of_zeros():
    report, code = run(["commute", KDV, "--max-level", "6"])
    assert code == 0 and report["verdict"] == "PASS"
    assert len(report["matrix"]) == 7
    assert all(x == "0" for row in report["matrix"] for x in row)
    assert report["truncation"] == [16, 6, 16, 2]
    assert all(e["unverified_terms"] == 0 for e in report["residuals"])


def test_mc_check_kdv():
    report, code = run(["mc-check", KDV, "--trunc", "8,3,8,2"])
    assert code == 0 and report["verdict"] == "PASS"
    assert report["failing_degrees"] == [] and report["residuals"] == []
    assert report["window"]["max_degree"] == 5
    assert report["checked_terms"] > 0


def test_broken_table_fails_at_same_degrees(broken_reports):
    mc, mc_code, trr, trr_code = broken_reports
    assert mc_code == trr_code == 1
    assert mc["failing_degrees"] == trr["failing_degrees"] == [1, 2, 3, 4, 5]
    first = trr["residuals"][0]
    assert first["degree"] == 1 and first["residual"] != "0"
    assert all(not r["functional"]["zero"] for r in mc["residuals"])


def test_report_echoes_inputs_and_window(broken_reports):
    trr = broken_reports[2]
    assert trr["command"] == "trr-check"
    assert trr["inputs"]["phase"] == BROKEN
    assert trr["truncation"] == [8, 3, 8, 2]
    assert trr["window"] == {"max_degree": 5}


def test_bracket_eval_commuting():
    report, code = run(["bracket-eval", CUBIC, power(4), "--metric", METRIC, "--expect-zero"])
    assert code == 0
    assert report["is_zero"] and report["bracket"]["density"] == "0"
    assert report["density"] == "1/4 * b[0][0] * b[0][0] * b[0][0] * b[0][0] * d^1(b[0][0])"


def test_bracket_eval_nonzero():
    report, code = run(["bracket-eval", CUBIC, GRADIENT, "--metric", METRIC])
    assert code == 0 and not report["is_zero"]
    assert report["bracket"]["density"] == "-1/2 * d^1(b[0][0]) * d^1(b[0][0]) * d^1(b[0][0])"
    _, code = run(["bracket-eval", CUBIC, GRADIENT, "--metric", METRIC, "--expect-zero"])
    assert code == 1


def test_bracket_eval_reads_files(tmp_path):
    left = tmp_path / "left.txt"
    left.write_text(CUBIC + "\n")
    right = tmp_path / "right.json"
    right.write_text(json.dumps([{"coeff": "1/2", "factors": [["b", 0, 0, 1], ["b", 0, 0, 1]]}]))
    report, _ = run(["bracket-eval", str(left), str(right), "--metric", METRIC])
    assert report["inputs_parsed"] == [CUBIC, GRADIENT]


@pytest.mark.parametrize(
    "argv",
    [
        ["bracket-eval", "b[0][0]^3", CUBIC, "--metric", METRIC],
        ["mc-check", KDV, "--trunc", "8,3"],
        ["mc-check", "no/such/file.json"],
        ["hamiltonians", KDV, "--max-level", "-1"],
        ["transfer-check", str(DATA / "transfer_heisenberg.json"), "--arity-cap", "2"],
        ["transfer-check", METRIC],
    ],
)
def test_parse_errors(argv):
    report, code = run(argv)
    assert code == 2
    assert report["verdict"] == "ERROR" and report["error"]["code"] == "parse_error"


def test_dimension_mismatch(tmp_path):
    bad = tmp_path / "phase.json"
    obj = json.loads(Path(KDV).read_text())
    obj["dim"] = 2
    bad.write_text(json.dumps(obj))
    report, code = run(["mc-check", str(bad)])
    assert code == 3 and report["error"]["code"] == "dimension_mismatch"
    report, code = run(["bracket-eval", "1 * b[1][0]", CUBIC, "--metric", METRIC])
    assert code == 3


def test_window_shrinks_with_warning():
    report, code = run(["mc-check", KDV, "--trunc", "6,2,6,2", "--degree", "9"])
    assert code == 0
    assert report["window"]["max_degree"] == 3
    assert report["warnings"] == ["residual degree: requested 9 exceeds verified 3; shrunk"]


def test_window_strict_fails():
    report, code = run(["mc-check", KDV, "--trunc", "6,2,6,2", "--degree", "9", "--window-strict"])
    assert code == 4 and report["error"]["code"] == "window_too_small"


def test_window_strict_passes_inside_window():
    _, code = run(["mc-check", KDV, "--trunc", "6,2,6,2", "--degree", "2", "--window-strict"])
    assert code == 0


def test_hamiltonian_window_strict():
    _, code = run(["hamiltonians", KDV, "--max-level", "8", "--trunc", "8,0,8,2", "--window-strict"])
    assert code == 4


@pytest.mark.parametrize(
    "name,expected",
    [("heisenberg", 0), ("massey", 0), ("acyclic_extension", 0), ("chern_simons", 0), ("broken_heisenberg", 1)],
)
def test_transfer_check(name, expected):
    report, code = run(["transfer-check", str(DATA / f"transfer_{name}.json")])
    assert code == expected
    sides = report["side_conditions"]
    assert all(not s["failures"] for s in sides.values())
    if expected == 0:
        assert report["residuals"] == {"before": [], "after": []}
    else:
        assert report["residuals"]["before"]


def test_transfer_methods_agree():
    path = str(DATA / "transfer_ternary_partial.json")
    outs = {m: run(["transfer-check", path, "--method", m])[0]["transferred"] for m in ("trees", "skeletons", "flow")}
    assert outs["trees"] == outs["skeletons"] == outs["flow"]


def test_transfer_arity_window(tmp_path):
    fixture = tmp_path / "quartic.json"
    fixture.write_text(json.dumps({
        "kind": "explicit",
        "basis": [["a", 0], ["b", 1]],
        "Q": [[0, 0], [0, 0]],
        "omega": [["0", "1"], ["-1", "0"]],
        "interaction": [{"coeff": "1/24", "vars": ["a", "a", "a", "a"]}],
    }))
    report, code = run(["transfer-check", str(fixture), "--arity-cap", "3"])
    assert code == 0 and report["warnings"]
    _, code = run(["transfer-check", str(fixture), "--arity-cap", "3", "--window-strict"])
    assert code == 4


def test_output_is_deterministic(tmp_path, capsys):
    argv = ["commute", KDV, "--max-level", "3"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    out = tmp_path / "report.json"
    assert main(argv + ["--output", str(out)]) == 0
    assert out.read_text() == first
    assert capsys.readouterr().out == ""
    assert first == dumps(json.loads(first))


def test_warnings_go_to_stderr(capsys):
    main(["mc-check", KDV, "--trunc", "6,2,6,2", "--degree", "9"])
    captured = capsys.readouterr()
    assert "warning: residual degree" in captured.err
    assert json.loads(captured.out)["verdict"] == "PASS"


def test_rationals_are_strings():
    report, _ = run(["hamiltonians", KDV, "--max-level", "1"])
    coeffs = [t["coeff"] for h in report["hamiltonians"] for t in h["terms"]]
    assert coeffs == ["1/2", "1/6"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bvhier.cli", "trr-check", BROKEN, "--trunc", "6,2,6,2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["exit_status"] == 1
