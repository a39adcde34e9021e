import json
import subprocess
import sys

import pytest

from tracecert.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cyceq(capsys):
    assert call(capsys, "cyceq", "X*Y", "Y*X") == (0, "equivalent\n", "")
    code, out, _ = call(capsys, "cyceq", "X*Y*Z", "Z*Y*X", "--json")
    assert json.loads(out) == {"equivalent": False}


def test_falsify_constant(capsys):
    code, out, _ = call(capsys, "falsify", "--poly", "0 - 1", "--size", "1", "--trials", "1", "--seed", "7")
    assert code == 0
    assert "trace -1" in out


def test_falsify_json_is_deterministic(capsys):
    argv = ["falsify", "--poly", "X*Y + Y*X", "--size", "2", "--trials", "5", "--seed", "3", "--json"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b
    assert json.loads(a)["witness"]["trace"] < 0


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("TRACECERT_SEED", "5")
    _, a, _ = call(capsys, "moments", "--k", "1", "--json")
    _, b, _ = call(capsys, "moments", "--k", "1", "--json", "--seed", "5")
    assert a == b


def test_canon_and_decompose(capsys):
    _, out, _ = call(capsys, "canon", "--poly", "Y*X + X*Y", "--json")
    assert json.loads(out)["classes"] == {"X1*X2": "2/1"}
    _, out, _ = call(capsys, "decompose", "X*Y - Y*X", "--json")
    data = json.loads(out)
    assert data["cyclically_zero"] is True
    _, out, _ = call(capsys, "decompose", "X*Y*Z - Z*Y*X")
    assert out.startswith("not cyclically zero")


def test_psd_check(capsys, tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"n": 2, "s": 2, "matrices": [[0.5, 0.5, 0.5, 0.5], [-1, 0, 0, 1]]}))
    code, out, _ = call(capsys, "psd-check", "--poly", "Y*X^4*Y + X*Y^4*X - 3*X*Y^2*X + 1",
                        "--tuple", str(path), "--json")
    data = json.loads(out)
    assert code == 0 and data["psd"] is False
    assert data["min_eigenvalue"] == pytest.approx(-1.0)
    assert data["trace"] == pytest.approx(1.0)


def test_certify_verify_roundtrip(capsys, tmp_path):
    code, out, _ = call(capsys, "certify", "--poly", "(1-X^2)*(1-Y^2)", "--eps", "1/10", "--kmax", "4", "--json")
    assert code == 0
    path = tmp_path / "c.json"
    path.write_text(out)
    assert call(capsys, "verify", str(path))[0] == 0
    data = json.loads(out)
    data["epsilon"] = "1/11"
    path.write_text(json.dumps(data))
    assert call(capsys, "verify", str(path))[0] == 1


def test_certify_dual_evidence(capsys):
    code, out, _ = call(capsys, "certify", "--poly", "(1-X^2)*(1-Y^2)", "--eps", "0", "--kmax", "2", "--json")
    assert code == 2
    data = json.loads(out)
    assert data["level"] == 2 and data["values"]["1"] == pytest.approx(1.0)


def test_certify_poly_file(capsys, tmp_path):
    path = tmp_path / "motzkin.txt"
    path.write_text("Y*X^4*Y + X*Y^4*X - 3*X*Y^2*X + 1\n")
    code, out, _ = call(capsys, "certify", "--poly-file", str(path), "--eps", "1/4", "--kmax", "6", "--json")
    assert code == 0
    assert json.loads(out)["epsilon"] == "1/4"


def test_builders(capsys):
    assert call(capsys, "example42", "--m", "3")[0] == 0
    assert call(capsys, "motzkin", "--eps", "1/3")[0] == 0
    code, out, _ = call(capsys, "bound-cert", "--word", "X*Y^2", "--sign", "-", "--json")
    assert code == 0 and json.loads(out)["target"].startswith("2 ")


def test_lift_putinar(capsys, tmp_path):
    path = tmp_path / "cc.json"
    path.write_text(json.dumps({"n": 2, "target": "1 - X1^2*X2^2", "epsilon": "0",
                                "squares": [], "x_terms": [{"lambda": "1", "poly": "1"}],
                                "y_terms": [{"lambda": "1", "poly": "X1"}]}))
    code, out, _ = call(capsys, "lift-putinar", str(path), "--json")
    assert code == 0


def test_moments_and_gns(capsys, tmp_path):
    _, out, _ = call(capsys, "moments", "--k", "6", "--size", "3", "--seed", "2", "--json")
    path = tmp_path / "m.json"
    path.write_text(out)
    code, out, _ = call(capsys, "gns", "--moments", str(path), "--k", "3", "--json")
    assert code == 0
    assert json.loads(out)["dimension"] <= 7


def test_polarize(capsys):
    code, out, _ = call(capsys, "polarize", "--poly", "X^2", "--var", "1", "--degree", "2")
    assert code == 0 and out.strip() == "X1*X2 + X2*X1"


@pytest.mark.parametrize("argv,code", [
    (["cyceq", "X*"], 64),
    (["cyceq", "X*", "Y"], 65),
    (["certify", "--poly", "X", "--eps", "one"], 64),
    (["verify", "/nonexistent/file.json"], 65),
    (["nosuchcommand"], 64),
    (["example42", "--m", "1"], 64),
])
def test_exit_codes(capsys, argv, code):
    assert call(capsys, *argv)[0] == code


def test_every_subcommand_has_json_flag():
    from tracecert.cli import build_parser

    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        assert any("--json" in a.option_strings for a in sp._actions), name


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "tracecert.cli", "cyceq", "X*Y", "Y*X"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "equivalent"
