import io
import json
import shutil
import subprocess
import sys

import pytest

from whitehead_calc.cli import main
from whitehead_calc.serialize import loads

LHS = "W(sum_{j>=1}(l[2j-1]), sum_{j>=1}(l[2j]))"
RHS = ("sum_{j>=1}(W(l[2j-1], l[2j])) + sum_{j>=1}(W(l[2j-1], sum_{k>j}(l[2k])))"
       " + sum_{j>=1}(W(sum_{k>j}(l[2k-1]), l[2j]))")


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return _write


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_normalize_finite_example(write):
    f = write("a.txt", "W(l[1]+l[2], l[3]) - W(l[2],l[3])")
    code, out, err = run("normalize", f)
    assert (code, out, err) == (0, "M(1,3)=1\n", "")


def test_normalize_json_is_a_standard_form(write):
    f = write("a.txt", "W(l[1]+l[2], l[3]) - W(l[2],l[3])")
    code, out, _ = run("normalize", f, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "whitehead-calc/v1" and doc["kind"] == "standard_form"
    assert doc["overrides"] == [["1", "0", "3", "0", "1"]]
    # flags also work before the subcommand
    assert run("--format", "json", "normalize", f)[1] == out


def test_normalize_schematic_and_truncated(write, monkeypatch):
    f = write("s.txt", "sum_{j>=1}(W(l[j], sum_{k>j}(l[k])))")
    code, out, _ = run("normalize", f, "--truncate", "3")
    assert code == 0
    assert out.splitlines() == ["M(1,2)=1", "M(1,3)=1", "M(2,3)=1"]
    monkeypatch.setenv("WHITEHEAD_CALC_TRUNCATE", "2")
    code, out, _ = run("normalize", f)
    lines = out.splitlines()
    assert lines[0].startswith("M(j,k)=1 for")
    assert lines[1:] == ["# table up to index 2", "M(1,2)=1"]


def test_eq_of_the_three_term_expansion(write):
    a, b = write("lhs.txt", LHS), write("rhs.txt", RHS)
    assert run("eq", a, b)[:2] == (0, "equal\n")
    c = write("c.txt", "sum_{j>=1}(W(l[2j-1], l[2j]))")
    code, out, _ = run("eq", a, c)
    assert code == 1 and out.startswith("different at")
    code, out, _ = run("eq", a, c, "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["equal"] is False and len(doc["witness"]) == 4


def test_validate(write):
    good = write("g.txt", LHS)
    assert run("validate", good)[:2] == (0, "ok\n")
    bad = write("b.txt", "sum_{k>=1}(W(l[1], l[k]))")
    code, out, _ = run("validate", bad, "--format", "json")
    assert code == 1 and json.loads(out)["error"] == "cluster_violation"
    overlap = write("o.txt", "W(l[1] + l[2], l[2])")
    code, out, _ = run("validate", overlap)
    assert code == 1 and out.startswith("invalid:")


def test_phi_inv_and_project(write):
    f = write("p.txt", "5*W(l[1], l[3])")
    code, out, _ = run("phi-inv", f, "--format", "json")
    assert code == 0 and loads(out).rows == ((1, 0, ((3, 0, 5),)),)
    code, out, _ = run("project", f, "1", "3")
    assert code == 0 and out.strip()
    code, out, _ = run("project", f, "1", "3", "--format", "json")
    assert loads(out).coords == (((0, 0), 5),)


def test_group_commands():
    assert run("group", "--truncated", "earring", "4")[:2] == (0, "Z^6\n")
    assert run("group", "--finite-wedge", "Z,Z,Z")[:2] == (0, "Z^3\n")
    assert run("group", "--finite-wedge", "Z_2,Z_3")[:2] == (0, "0\n")
    assert run("group", "--truncated", "Z_2,Z_4,Z_8", "3")[:2] == (0, "Z_2 + Z_2 + Z_4\n")


def test_group_with_a_sidecar(write):
    w = write("w.json", json.dumps({"groups": ["Z_2", [4]], "tail": None}))
    assert run("group", "--truncated", w, "2")[:2] == (0, "Z_2\n")


def test_tensor_command():
    assert run("tensor", "Z_4", "Z_6+Z")[:2] == (0, "Z_2 + Z_4\n")
    code, out, _ = run("tensor", "Z_4", "Z_6", "--format", "json")
    assert json.loads(out)["orders"] == ["2"]


def test_jacobi_command(write):
    fs = [write(f"x{i}.txt", f"l[{i}]") for i in (1, 2, 3)]
    assert run("jacobi", *fs, "--depth", "4")[:2] == (0, "zero\n")
    assert run("jacobi", *fs, "--depth", "4", "--grade-n", "3")[:2] == (0, "zero\n")


def test_wedge_sidecar_sets_grade_and_torsion(write):
    w = write("w.json", json.dumps({"groups": [], "tail": "Z_2", "grade_n": 3}))
    f = write("e.txt", "sum_{j>=1}(W(l[j], sum_{k>j}(2*l[k])))")
    code, out, _ = run("normalize", f, "--wedge", w, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["grade_n"] == 3 and doc["entries"] == []


def test_errors_are_machine_readable(write):
    f = write("bad.txt", "W(l[1],\n l[2]")
    code, out, err = run("normalize", f, "--format", "json")
    doc = json.loads(err)
    assert code == 2 and out == ""
    assert doc["error"] == "parse_error" and doc["line"] == 2
    code, out, err = run("normalize", f)
    assert code == 2 and err.startswith("error: line 2")
    code, _, err = run("normalize", str(f) + ".missing", "--format", "json")
    assert code == 2 and json.loads(err)["error"] == "usage_error"


def test_not_in_W_is_reported(write):
    f = write("l.txt", "l[1]")
    code, _, err = run("normalize", f, "--format", "json")
    assert code == 2 and json.loads(err)["kind"] == "error"


def test_output_is_byte_identical_across_runs(write):
    f = write("lhs.txt", LHS)
    outs = {run("normalize", f, "--format", "json")[1] for _ in range(3)}
    assert len(outs) == 1


def test_console_script(write):
    f = write("a.txt", "W(l[1]+l[2], l[3]) - W(l[2],l[3])")
    exe = shutil.which("whitehead-calc")
    cmd = [exe] if exe else [sys.executable, "-m", "whitehead_calc.cli"]
    proc = subprocess.run(cmd + ["normalize", f], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout == "M(1,3)=1\n"
