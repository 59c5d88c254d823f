import json
import subprocess
import sys
from fractions import Fraction

import pytest

from thetanv.cli import main
from thetanv.halfint import HalfIntForm, SupportRule


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def envelope(argv, capsys):
    code, out, err = run(argv, capsys)
    return code, json.loads(out), err


def test_gauss_eval(capsys):
    code, env, err = envelope(["gauss", "eval", "--a", "1", "--b", "2", "--c", "4"], capsys)
    assert code == 0 and env["status"] == "pass"
    assert env["payload"]["numeric"] == pytest.approx([2, -2])
    assert env["parameters"] == {"a": 1, "b": 2, "c": 4}
    assert err.startswith("[pass] gauss eval")


def test_gauss_verify(capsys):
    code, env, _ = envelope(["gauss", "verify", "--cmax", "50", "--jobs", "1"], capsys)
    assert code == 0 and env["payload"]["failures"] == []
    assert env["payload"]["checked"] == sum(c * c for c in range(1, 51))


def test_gauss_verify_min_case_count_fails(capsys):
    code, env, _ = envelope(["gauss", "verify", "--cmax", "8", "--jobs", "1", "--min-case-count", "10000"], capsys)
    assert code == 1 and env["status"] == "fail"


def test_epsilon_matrix(capsys):
    code, env, _ = envelope(["epsilon", "matrix", "--N", "3", "--m1", "3", "--m2", "1"], capsys)
    assert code == 0
    assert env["payload"]["matrix"]["rows"] == 6


def test_square_classes(capsys):
    code, env, _ = envelope(["square-classes", "--m1", "3", "--m2", "1", "--nu0", "1"], capsys)
    assert code == 0
    assert json.dumps(env["payload"]).count("5") >= 1


def test_rank_scan_json_and_csv(capsys):
    code, env, _ = envelope(["rank", "scan", "--max-index", "15", "--levels", "1,3,9,15", "--jobs", "1"], capsys)
    assert code == 0 and env["status"] == "pass"
    assert env["payload"]["failures"] == []
    code, out, _ = run(["rank", "scan", "--max-index", "15", "--format", "csv", "--jobs", "1"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "N,m1,m2,cells,passes,failures,crt_checks,crt_failures"
    assert len(lines) > 1


def test_rank_scan_even_fails(capsys):
    code, env, _ = envelope(["rank", "scan", "--max-index", "6", "--include-even", "--no-crt", "--jobs", "1"], capsys)
    assert code == 1 and env["status"] == "fail" and env["payload"]["failures"]


def test_jacobi_pipeline(tmp_path, capsys):
    code, env, _ = envelope(["jacobi", "construct", "--prec", "40"], capsys)
    assert code == 0
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(env["payload"]["form"]))
    code, env, _ = envelope(["jacobi", "vell", "--input", str(path), "--ell", "3", "--prec", "40"], capsys)
    assert code == 0 and env["payload"]["form"]["index"] == 3
    code, env, _ = envelope(["jacobi", "check", "--ell", "5", "--prec", "40"], capsys)
    assert code == 0 and env["payload"]["primitive_nonzero"] == [1, 3, 7, 9]
    code, env, _ = envelope(["jacobi", "decompose", "--input", str(path)], capsys)
    assert code == 0


def test_jacobi_transform_check(capsys):
    code, env, _ = envelope(["jacobi", "transform-check", "--m", "3", "--tau", "1j"], capsys)
    assert code == 0 and env["status"] == "pass"


def test_halfint_sieve(tmp_path, capsys):
    f = HalfIntForm(Fraction(5, 2), 12, {3: 1, 15: 2}, 60, SupportRule(6, {3}))
    path = tmp_path / "f.json"
    path.write_text(json.dumps(f.to_json()))
    code, env, _ = envelope(["halfint", "sieve", "--input", str(path), "--L", "3", "--Lf", "2"], capsys)
    assert code == 0
    assert env["payload"]["exponents"] == {"3": 1}


def test_halfint_hypothesis_violation_exits_2(tmp_path, capsys):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"kappa_num": 5, "L": 3, "entries": [[3, 1, 1], [6, 1, 1]]}))
    code, out, err = run(["halfint", "sieve", "--input", str(path), "--L", "3", "--Lf", "2", "--bound", "60"], capsys)
    assert code == 2 and "6" in err and out == ""


def test_witness(capsys):
    code, env, _ = envelope(["witness", "--p", "3", "--mu", "1", "--D", "11"], capsys)
    assert code == 0
    assert env["payload"]["T"] == [[1, 0.5], [0.5, 3]] and env["payload"]["fourDet"] == 11


@pytest.mark.parametrize("argv", [
    ["witness", "--p", "3", "--mu", "1", "--D", "12"],
    ["witness", "--p", "4", "--mu", "1", "--D", "15"],
    ["jacobi", "vell", "--input", "/nonexistent.json", "--ell", "3"],
])
def test_input_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and "error" in err


def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(["halfint", "sieve", "--input", str(path), "--L", "3", "--Lf", "2"], capsys)
    assert code == 2


@pytest.mark.parametrize("argv", [["witness", "--p", "3"], ["gauss", "frobnicate"], ["witness", "--bogus", "1"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 2


def test_byte_stable(capsys):
    argv = ["epsilon", "matrix", "--N", "15", "--m1", "3", "--m2", "5"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second


def test_jobs_do_not_change_payload(capsys):
    _, a, _ = run(["rank", "scan", "--max-index", "21", "--jobs", "1"], capsys)
    _, b, _ = run(["rank", "scan", "--max-index", "21", "--jobs", "2"], capsys)
    assert a == b


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "thetanv", "witness", "--p", "5", "--mu", "3", "--D", "11"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["T"] == [[1, 1.5], [1.5, 5]]
