from __future__ import annotations

import io
import json

import pytest

from loopunroll import corpus
from loopunroll.cli import CompareConfig, main

QUOTIENT = str(corpus.fixture_path("quotient"))
FOR_DOUBLE = str(corpus.fixture_path("for_double"))


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def rows(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


# ------------------------------------------------------------------ parse


def test_parse_pretty():
    code, out = run("parse", QUOTIENT)
    assert code == 0 and "while (a >= b)" in out


def test_parse_ast_is_json():
    code, out = run("parse", QUOTIENT, "--emit", "ast")
    assert code == 0 and json.loads(out)["node"] == "Program"


def test_parse_empty_file(tmp_path):
    f = tmp_path / "empty.mini"
    f.write_text("")
    assert run("parse", str(f)) == (0, "")


def test_missing_file(tmp_path, capsys):
    code, _ = run("parse", str(tmp_path / "nope.mini"))
    assert code == 1 and "cannot read" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    f = tmp_path / "bad.mini"
    f.write_text("var x x;")
    code, _ = run("parse", str(f))
    assert code == 2 and "1:7" in capsys.readouterr().err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        run("unroll", QUOTIENT, "--factor", "1")
    assert exc.value.code == 2


# ----------------------------------------------------------------- unroll


def test_unroll_quotient():
    code, out = run("unroll", QUOTIENT, "--factor", "2", "--mode", "wp")
    assert code == 0
    assert "while (a >= 2 * b)" in out or "while (a >= b && a >= 2 * b)" in out
    assert out.count("while") == 2


def test_unroll_for_four_copies():
    code, out = run("unroll", FOR_DOUBLE, "--factor", "4")
    assert code == 0
    for j in (1, 2, 3):
        assert f"a[i + {j}] = a[i + {j}] * 2;" in out


def test_unroll_rejects_if_body(tmp_path, capsys):
    f = tmp_path / "q.mini"
    f.write_text("var q = 0; var a = 7; var b = 2; while (a >= b) { if (a > 3) { q = q + 1; } a = a - b; }")
    code, _ = run("unroll", str(f), "--mode", "wp")
    assert code == 3 and "1:" in capsys.readouterr().err


def test_unroll_missing_loop(capsys):
    code, _ = run("unroll", QUOTIENT, "--loop", "nosuch")
    assert code == 3


# -------------------------------------------------------------------- run


def test_run_quotient():
    code, out = run("run", QUOTIENT, "--input", "a=7", "--input", "b=2", "--width", "2")
    assert code == 0
    assert "q = 3" in out and "a = 1" in out
    assert "loop_guard_evals=4" in out and "cycles=" in out


def test_run_trace_lines():
    code, out = run("run", QUOTIENT, "--input", "a=3", "--input", "b=1", "--trace", "-")
    lines = [json.loads(l) for l in out.splitlines() if l.startswith("{")]
    assert code == 0 and len(lines) == 10


def test_run_budget_exhaustion(tmp_path, capsys):
    f = tmp_path / "spin.mini"
    f.write_text("var x = 0; while (x >= 0) { x = 1; }")
    code, out = run("run", str(f), "--budget", "50")
    assert code == 0 and "terminated=false" in out


def test_run_runtime_error(tmp_path):
    f = tmp_path / "div.mini"
    f.write_text("var x = 1; var z = 0; x = x / z;")
    assert run("run", str(f))[0] == 6


# ---------------------------------------------------------------- compare


def test_compare_quotient(capsys):
    code, out = run(
        "compare", QUOTIENT, "--factor", "2,4,8", "--width", "1", "--width", "2",
        "--input", "a=10000", "--input", "b=1", "--rename", "--trials", "10",
    )
    assert code == 0
    assert out.startswith("# config: command=compare")
    assert "seed=0" in out.splitlines()[0]
    table = rows(out)
    assert len(table) == 8
    err = capsys.readouterr().err
    assert "overhead ratio k=2: 10001/5002" in err
    assert "max speedup:" in err


def test_compare_self_is_identity():
    code, out = run("compare", QUOTIENT, "--width", "1,2,4", "--input", "a=50", "--input", "b=3", "--trials", "5")
    assert code == 0
    assert {r["speedup_vs_baseline"] for r in rows(out)} == {"1.000000"}


def test_compare_csv_file(tmp_path):
    dest = tmp_path / "r.csv"
    code, out = run("compare", QUOTIENT, "--factor", "2", "--input", "a=20", "--input", "b=3", "--trials", "5", "--csv", str(dest))
    assert code == 0 and "equivalence k=2: Equivalent" in out
    assert dest.read_text().startswith("# config:")


def test_compare_config_validation():
    with pytest.raises(ValueError):
        CompareConfig("x", [1], [1])
    with pytest.raises(ValueError):
        CompareConfig("x", [2], [0])
    with pytest.raises(ValueError):
        CompareConfig("x", [2], [1], trials=0)


# -------------------------------------------------------------- listbench


def test_listbench_sweep_no_mismatch():
    code, out = run("listbench", "--n", "0..64", "--width", "2")
    assert code == 0 and len(rows(out)) == 3 * 65


def test_listbench_twoptr_single_node():
    code, out = run("listbench", "--variant", "V3", "--n", "1")
    (row,) = rows(out)
    assert code == 0 and row["exit_kind"] == "met" and row["n"] == "1"


def test_listbench_width_plateau():
    code, out = run("listbench", "--n", "60", "--width", "1,2,4,8", "--rename")
    cycles = {}
    for r in rows(out):
        cycles.setdefault(r["variant"], []).append(int(r["cycles"]))
    v3, v2 = cycles["V3-twoptr"], cycles["V2-sentinel3"]
    assert v3[0] > v3[1] == v3[2] == v3[3]
    assert v2[1] == v2[2] == v2[3]


def test_listbench_oracle_mismatch(monkeypatch):
    import loopunroll.listlab as ll

    monkeypatch.setattr(ll, "count_oracle", lambda n: -1)
    assert run("listbench", "--n", "3")[0] == 5


def test_listbench_unknown_variant():
    with pytest.raises(SystemExit) as exc:
        run("listbench", "--variant", "V9")
    assert exc.value.code == 2


def test_unroll_guard_too_large(tmp_path, capsys):
    f = tmp_path / "coupled.mini"
    f.write_text("var a = 1; var b = 2; while (a < 100) { a = a + b + b; b = a + a; }")
    code, _ = run("unroll", str(f), "--factor", "16")
    assert code == 3 and "nodes" in capsys.readouterr().err
