import json
import shutil

import pytest

from conftest import BENCH, P1_TEXT, P2_TEXT
from invgh.cli import comparison_table, main, read_manifest, run_bench

FREEFALL = str(BENCH / "freefall.imp")
SCHEMA = {
    "program", "mode", "degree", "tau", "template_size", "constraints",
    "matchings_tried", "t_inf_ms", "t_sol_ms", "status", "invariants",
}


def run_json(capsys, *argv):
    code = main(list(argv) + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def test_infer_found(capsys):
    code, rep = run_json(capsys, "infer", FREEFALL, "--degree", "2", "--mode", "gh", "--target", "v")
    assert code == 0
    assert SCHEMA <= set(rep)
    assert rep["status"] == "Found" and rep["template_size"] == 8
    assert rep["invariants"] == ["x*rho + t*g - x0*rho - t0*g + v - v0"]


def test_infer_text_output(capsys):
    assert main(["infer", FREEFALL, "-d", "2", "--mode", "full"]) == 0
    out = capsys.readouterr().out
    assert "status: Found" in out and "template size: 66" in out


def test_infer_no_solution(tmp_path, capsys):
    prog = tmp_path / "skip.imp"
    prog.write_text("x := x;\n")
    code, rep = run_json(capsys, "infer", str(prog), "--degree", "1", "--mode", "full")
    assert code == 2 and rep["status"] == "NoSolution"


def test_infer_empty_template(capsys):
    code, rep = run_json(capsys, "infer", FREEFALL, "--degree", "1", "--mode", "gh", "--target", "x^2")
    assert code == 2 and rep["status"] == "EmptyTemplate"


def test_infer_cap_exceeded(capsys):
    code, rep = run_json(capsys, "infer", FREEFALL, "--degree", "2", "--mode", "full", "--cap", "0")
    assert code == 4 and rep["status"] == "CapExceeded"


@pytest.mark.parametrize(
    "argv",
    [
        ["infer", "missing.imp", "-d", "2", "--mode", "full"],
        ["infer", FREEFALL, "-d", "2", "--mode", "gh"],
        ["infer", FREEFALL, "-d", "2", "--mode", "gh", "--target", "nope"],
        ["check", FREEFALL, "--invariant", "x + unknown"],
        ["gamma", FREEFALL, "--pin", "t=T", "--pin", "a=L"],
    ],
)
def test_input_errors(argv, capsys):
    assert main(argv) == 3
    assert "invgh: error:" in capsys.readouterr().err


def test_parse_error_reports_position(tmp_path, capsys):
    prog = tmp_path / "bad.imp"
    prog.write_text("x := 1;\ny := ;\n")
    assert main(["infer", str(prog), "-d", "1", "--mode", "full"]) == 3
    assert "bad.imp:2:6" in capsys.readouterr().err


def test_gamma_with_pin(capsys):
    code, rep = run_json(capsys, "gamma", FREEFALL, "--pin", "v=L*T^-1", "--pin", "t=T")
    assert code == 0
    assert rep["gamma"]["x"] == "L" and rep["gamma"]["rho"] == "T^-1" and rep["gamma"]["g"] == "L * T^-2"


def test_check_exit_codes(capsys):
    code, rep = run_json(capsys, "check", FREEFALL, "--invariant", P1_TEXT, "--align")
    assert code == 0 and rep["passed"] and rep["seed"] == 42
    code, rep = run_json(capsys, "check", FREEFALL, "--invariant", P2_TEXT, "--align")
    assert code == 1 and rep["violations"]


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("INVGH_SEED", "7")
    _, rep = run_json(capsys, "check", FREEFALL, "--invariant", P1_TEXT, "--trials", "5", "--align")
    assert rep["seed"] == 7


def test_empty_suite(tmp_path, capsys):
    assert read_manifest(tmp_path) == []
    assert main(["bench", "--suite", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_small_suite(tmp_path, capsys):
    shutil.copy(BENCH / "sumpower1.imp", tmp_path)
    (tmp_path / "manifest.ini").write_text(
        "[sumpower1]\nfile = sumpower1.imp\ndegree = 3\ntarget = X^3\nalign = yes\nmodes = full, gh\n"
    )
    out = tmp_path / "report.json"
    assert main(["bench", "--suite", str(tmp_path), "--out", str(out), "--jobs", "2"]) == 0
    reports = json.loads(out.read_text())
    assert [(r["mode"], r["status"]) for r in reports] == [("full", "Found"), ("gh", "Found")]
    assert all(r["check"]["passed"] for r in reports)
    assert reports[1]["full_mode_replay"] == "ok"
    assert reports[0]["template_size"] == reports[1]["template_size"] == 35
    assert "sumpower1" in capsys.readouterr().out


def test_reports_are_deterministic_modulo_timing(tmp_path):
    shutil.copy(BENCH / "freefall.imp", tmp_path)
    (tmp_path / "manifest.ini").write_text("[ff]\nfile = freefall.imp\ndegree = 2\ntarget = v\n")
    strip = lambda rs: [{k: v for k, v in r.items() if not k.startswith("t_")} for r in rs]  # noqa: E731
    a = run_bench(tmp_path, check=False)
    b = run_bench(tmp_path, check=False)
    assert strip(a) == strip(b)
    assert "ff" in comparison_table(a)
