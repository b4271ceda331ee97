from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from minij_null.cli import main
from minij_null.config import ENV_VAR

from conftest import CORPUS


def cli(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, rel: str, text: str):
    p = tmp_path / rel
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    return p


CLEAN = "package app;\nclass A { Object m() { return new Object(); } }\n"
DIRTY = "package app;\nclass A { void m(@Nullable Object x) { x.hashCode(); } }\n"
CONFIG = json.dumps({"annotatedPackages": "app"})


@pytest.fixture
def project(tmp_path):
    write(tmp_path, "minij-null.json", CONFIG)
    return tmp_path


def test_exit_zero_when_clean(project):
    write(project, "src/A.mj", CLEAN)
    code, out, _ = cli("check", str(project / "src"))
    assert code == 0
    assert out.splitlines()[-1].startswith("0 errors;")


def test_exit_one_on_diagnostics(project):
    f = write(project, "src/A.mj", DIRTY)
    code, out, _ = cli("check", str(f))
    assert code == 1
    assert f"{f.as_posix()}:2:" in out and "error[DEREF_NULLABLE]" in out


def test_exit_two_on_syntax_error(project):
    write(project, "src/A.mj", "package app;\nclass A { void m( }\n")
    code, out, _ = cli("check", str(project / "src"))
    assert code == 2 and "error[SYNTAX]" in out


def test_missing_config_is_an_error(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    write(tmp_path, "A.mj", CLEAN)
    code, _, err = cli("check", str(tmp_path / "A.mj"))
    assert code == 2 and "no configuration" in err


def test_missing_path_is_an_error(project):
    code, _, err = cli("check", str(project / "nope"))
    assert code == 2 and "no such file" in err


def test_config_from_environment(tmp_path, monkeypatch):
    cfg = write(tmp_path, "conf/cfg.json", CONFIG)
    write(tmp_path, "src/A.mj", DIRTY)
    monkeypatch.setenv(ENV_VAR, str(cfg))
    code, _, _ = cli("check", str(tmp_path / "src"))
    assert code == 1


def test_bad_config_value(tmp_path):
    cfg = write(tmp_path, "c.json", json.dumps({"annotatedPackages": "app", "pessimisticMode": "yes"}))
    write(tmp_path, "A.mj", CLEAN)
    code, _, err = cli("check", "--config", str(cfg), str(tmp_path / "A.mj"))
    assert code == 2 and "pessimisticMode" in err


def test_command_line_overrides_config(project):
    write(project, "src/A.mj", DIRTY)
    code, _, _ = cli("check", "--annotated-packages", "other", str(project / "src"))
    assert code == 0


def test_json_round_trip(project):
    write(project, "src/A.mj", DIRTY)
    code, out, _ = cli("check", "--format", "json", str(project / "src"))
    doc = json.loads(out)
    assert code == 1
    [d] = doc["diagnostics"]
    assert d["code"] == "DEREF_NULLABLE" and d["line"] == 2 and d["suppressed"] is False
    assert doc["report"]["unsuppressed"] == 1
    assert json.loads(json.dumps(doc)) == doc


def test_show_suppressed(project):
    write(project, "src/A.mj", "package app;\nclass A {\n  @SuppressWarnings(\"NullAway\")\n"
                                "  void m(@Nullable Object x) { x.hashCode(); }\n}\n")
    code, out, _ = cli("check", str(project / "src"))
    assert code == 0 and "note[" not in out
    code, out, _ = cli("check", "--show-suppressed", str(project / "src"))
    assert "note[DEREF_NULLABLE]" in out and "(suppressed: annotation)" in out


def test_output_is_deterministic():
    for fmt in ("text", "json"):
        first = cli("check", "--format", fmt, str(CORPUS))
        second = cli("check", "--format", fmt, str(CORPUS))
        assert first == second


def test_dump_dataflow(project):
    write(project, "src/A.mj", "package app;\nclass A {\n  void m(@Nullable Object x) {\n"
                                "    if (x != null) { x.hashCode(); }\n  }\n}\n")
    code, out, _ = cli("check", "--dump-dataflow", "m", str(project / "src"))
    assert code == 0
    assert "== app.A.m/1 ==" in out and "x=NonNull" in out
    code, _, err = cli("check", "--dump-dataflow", "nothing", str(project / "src"))
    assert code == 2 and "no analyzed method" in err


# -- expect -----------------------------------------------------------------------------

def test_expect_corpus_passes_in_both_modes():
    code, out, _ = cli("expect", str(CORPUS))
    assert code == 0 and out.splitlines()[-1].endswith("files passed (optimistic mode)")
    code, out, _ = cli("expect", "--pessimistic", str(CORPUS))
    assert code == 0 and "(pessimistic mode)" in out


def test_expect_reports_failures(project):
    write(project, "src/A.mj", "package app;\nclass A { void m(@Nullable Object x) { x.hashCode(); } } //!NOERROR\n")
    code, out, _ = cli("expect", str(project / "src"))
    assert code == 1 and "FAIL" in out and "flagged NOERROR line: line 2 DEREF_NULLABLE" in out


def test_expect_rejects_unknown_code(project):
    write(project, "src/A.mj", "package app;\nclass A { } //!ERROR:NOT_A_CODE\n")
    code, _, err = cli("expect", str(project / "src"))
    assert code == 2 and "unknown diagnostic code" in err


# -- diff and bench ------------------------------------------------------------------------

def test_diff_is_monotone_and_strict_on_boundary_files():
    code, out, _ = cli("diff", "--format", "json", str(CORPUS))
    d = json.loads(out)
    assert code == 0 and d["monotone"] and d["pessimistic"] >= d["optimistic"]
    paths = [CORPUS / "paper" / "boundary.mj", CORPUS / "paper" / "boundary_lib.mj",
             CORPUS / "extra" / "boundary_stages.mj", CORPUS / "extra" / "lib"]
    code, out, _ = cli("diff", "--format", "json", *map(str, paths))
    d = json.loads(out)
    assert d["pessimistic"] > d["optimistic"]


def test_diff_text_table():
    code, out, _ = cli("diff", str(CORPUS))
    assert code == 0
    assert out.splitlines()[0].split() == ["code", "optimistic", "pessimistic", "delta"]
    assert out.splitlines()[-1].startswith("total")


def test_bench_rejects_too_few_repetitions():
    code, _, err = cli("bench", "--synthetic", "500", "--reps", "2")
    assert code == 2 and "at least 3" in err


def test_bench_small_synthetic():
    code, out, _ = cli("bench", "--synthetic", "1500", "--reps", "3", "--format", "json")
    b = json.loads(out)
    assert code == 0
    assert b["repetitions"] == 3 and b["loc"] >= 1000
    assert b["dataflow_ratio"] <= 1.0 and b["overhead_ratio"] > 0


def test_console_script_module_entry():
    p = subprocess.run([sys.executable, "-m", "minij_null.cli", "--version"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("minij-null")
