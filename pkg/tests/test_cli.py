import json
import subprocess
import sys

import pytest

from conftest import CORPUS, GOLDEN
from sygus.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", ["ex1_lia", "inv", "pbe_oracle", "weights"])
def test_validate_clean(capsys, name):
    assert run(capsys, "validate", CORPUS / f"{name}.sy") == (0, "", "")


def test_validate_reports_arity(capsys):
    code, out, _ = run(capsys, "validate", CORPUS / "oracle_constraint.sy")
    assert code == 1
    assert out.startswith("error E-ARITY 8:1 ")
    assert len(out.splitlines()) == 1


def test_validate_permissive_and_strict(capsys):
    path = CORPUS / "oracle_constraint.sy"
    assert run(capsys, "validate", path, "--permissive")[0] == 0
    assert run(capsys, "validate", path, "--permissive", "--strict")[0] == 1


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", CORPUS / "oracle_constraint.sy", "--json")
    d = json.loads(out)
    assert code == 1
    assert (d["code"], d["line"], d["column"], d["severity"]) == ("E-ARITY", 8, 1, "error")


def test_desugar_matches_golden(capsys):
    code, out, _ = run(capsys, "desugar", CORPUS / "inv.sy")
    assert code == 0
    assert out == (GOLDEN / "desugar_inv.out").read_text()


def test_check_pass(capsys):
    code, out, _ = run(capsys, "check", CORPUS / "inv.sy", "--solution", CORPUS / "inv.resp")
    assert code == 0
    assert out == "syntactic: pass\nsemantic: passed-bounded (500 points)\n"


def test_check_refuted(capsys, tmp_path):
    bad = tmp_path / "bad.resp"
    bad.write_text("((define-fun inv-f ((x Int) (y Int)) Bool true))")
    code, out, _ = run(capsys, "check", CORPUS / "inv.sy", "--solution", bad)
    assert code == 1
    assert "semantic: refuted" in out


def test_check_syntactic_failure(capsys, tmp_path):
    bad = tmp_path / "bad.resp"
    bad.write_text("((define-fun f ((x Int) (y Int)) Int (* x y)))")
    code, out, _ = run(capsys, "check", CORPUS / "ex1_lia.sy", "--solution", bad)
    assert code == 1
    assert out.startswith("syntactic: fail")


def test_check_no_solution_is_unknown(capsys, tmp_path):
    resp = tmp_path / "r"
    resp.write_text("fail")
    assert run(capsys, "check", CORPUS / "ex1_lia.sy", "--solution", resp)[0] == 4


def test_emit_smt_to_file(capsys, tmp_path):
    out = tmp_path / "q.smt2"
    code, _, _ = run(capsys, "emit-smt", CORPUS / "ex1_lia.sy", "--solution", CORPUS / "ex1_lia.resp", "-o", out)
    assert code == 0
    assert out.read_text() == (GOLDEN / "smt_ex1_lia.smt2").read_text()


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", CORPUS / "ex1_lia.sy", "--fun", "f", "--max-size", 1)
    assert code == 0
    assert out.split() == ["0", "1", "x", "y"]


@pytest.mark.parametrize("term, expected", [("(+ x (* x x))", "bases={3} pumps={}"), ("x", "bases={1} pumps={}")])
def test_weights(capsys, term, expected):
    code, out, _ = run(capsys, "weights", CORPUS / "weights.sy", "--fun", "f", "--keyword", ":numX", "--term", term)
    assert (code, out.strip()) == (0, expected)


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", CORPUS / "ex1_lia.sy", "--timeout", 10)
    assert code == 0
    assert "(define-fun f ((x Int) (y Int)) Int" in out


def test_solve_without_grammar_fails(capsys):
    code, out, _ = run(capsys, "solve", CORPUS / "inv.sy", "--timeout", 5)
    assert (code, out.strip()) == (1, "fail")


IO_SCRIPT = """(set-logic LIA)
(set-feature :oracles true)
(synth-fun f ((x Int)) Int ((I Int)) ((I Int (x 1 (+ I I)))))
(oracle-constraint-io f orc)
(check-synth)
"""


def test_solve_with_io_oracle(capsys, tmp_path):
    script = tmp_path / "io.sy"
    script.write_text(IO_SCRIPT)
    table = tmp_path / "t"
    table.write_text("(fallback (+ x1 1))\n")
    stub = tmp_path / "stub"
    stub.write_text(f"#!/bin/sh\nexec {sys.executable} -m sygus.cli oracle-stub --table {table} \"$@\"\n")
    stub.chmod(0o755)
    code, out, _ = run(capsys, "solve", script, "--oracle", f"orc={stub}", "--timeout", 30)
    assert code == 0
    assert "(define-fun f ((x Int)) Int (+ x 1))" in out


@pytest.mark.parametrize(
    "argv",
    [["bogus"], [], ["validate"], ["check", "x.sy"], ["solve", "x.sy", "--max-size", "many"]],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_missing_file_is_usage_error(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "nope.sy")[0] == 2


def test_unbound_function(capsys):
    code, _, err = run(capsys, "enumerate", CORPUS / "ex1_lia.sy", "--fun", "g")
    assert code == 1 and "E-UNBOUND" in err


def test_missing_oracle_exits_3(capsys, tmp_path):
    script = tmp_path / "io.sy"
    script.write_text(IO_SCRIPT)
    code, _, err = run(capsys, "solve", script, "--oracle", "orc=/nonexistent/orc")
    assert code == 3 and "E-ORACLE-SPAWN" in err


def test_oracle_stub_no_match(capsys, tmp_path):
    table = tmp_path / "t"
    table.write_text("((1) (2))\n")
    assert run(capsys, "oracle-stub", "--table", table, "1") == (0, "(2)\n", "")
    assert run(capsys, "oracle-stub", "--table", table, "5")[0] == 3


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "sygus.cli", "validate", str(CORPUS / "ex1_lia.sy")], capture_output=True)
    assert r.returncode == 0
