"""Tests for the command line front end: exit codes, report emission,
determinism, the golden report fixture, and the tolerance-scale override."""

import json
import math
from pathlib import Path

import pytest

from curvcheck import __version__
from curvcheck.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
VERIFY = str(FIXTURES / "verify.json")
MINIMAL = str(FIXTURES / "minimal.json")


def _write_config(tmp_path, doc, name="config.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _sine_config(tmp_path, **check_extra):
    doc = {
        "version": 1,
        "patches": {"p": {"base_dim": 2, "fiber_dim": 1}},
        "connections": {"g": {"patch": "p", "gamma": [["0", "sin(x1)*f1"]]}},
        "checks": [
            dict(
                {"name": "wavy", "kind": "curvature-coefficients", "connection": "g"},
                **check_extra,
            )
        ],
    }
    return _write_config(tmp_path, doc)


def _strip_duration(text: str) -> str:
    return "\n".join(
        line for line in text.splitlines() if '"duration_seconds"' not in line
    )


# --- version and parse-expr -------------------------------------------------


def test_version_command(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out == f"curvcheck {__version__}\n"


def test_parse_expr_prints_canonical_form(capsys):
    assert main(["parse-expr", "x1 * sin( f1 )+2"]) == 0
    assert capsys.readouterr().out == "x1*sin(f1) + 2\n"


def test_parse_expr_caret_diagnostic(capsys):
    assert main(["parse-expr", "x1 +"]) == 2
    err = capsys.readouterr().err.splitlines()
    assert err[0] == "x1 +"
    assert err[1] == "    ^"
    assert err[2].startswith("curvcheck: ")
    assert "offset 4" in err[2]


def test_parse_expr_unknown_identifier(capsys):
    assert main(["parse-expr", "y1"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("curvcheck: ")
    assert "y1" in err


def test_parse_expr_respects_dims(capsys):
    assert main(["parse-expr", "f3", "--dims", "2,2"]) == 2
    assert "f3" in capsys.readouterr().err
    assert main(["parse-expr", "f3", "--dims", "2,3"]) == 0
    assert capsys.readouterr().out == "f3\n"


def test_parse_expr_rejects_malformed_dims(capsys):
    for dims in ("2", "2,0", "0,2", "a,b", "1,2,3"):
        assert main(["parse-expr", "x1", "--dims", dims]) == 2
        assert capsys.readouterr().err.startswith("curvcheck: ")


# --- check: exit codes ------------------------------------------------------


def test_check_passes_on_verify_fixture(capsys):
    assert main(["check", VERIFY]) == 0
    out = capsys.readouterr().out
    assert "verdict: pass (13 checks, 0 failed)" in out


def test_check_json_output(capsys):
    assert main(["check", MINIMAL, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "pass"
    assert payload["tool_version"] == __version__
    assert len(payload["checks"]) == 1
    assert payload["checks"][0]["max_residual"] == 0.0


def test_check_exit_one_on_failure_but_report_still_emitted(tmp_path, capsys):
    config = _sine_config(tmp_path, tolerance=1e-30)
    assert main(["check", config]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out
    assert "verdict: fail" in out


def test_check_exit_two_on_missing_config(tmp_path, capsys):
    assert main(["check", str(tmp_path / "absent.json")]) == 2
    assert capsys.readouterr().err.startswith("curvcheck: ")


def test_check_exit_two_on_schema_error(tmp_path, capsys):
    config = _write_config(tmp_path, {"version": 1, "bananas": {}})
    assert main(["check", config]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_check_rejects_bad_flags(capsys):
    assert main(["check", MINIMAL, "--jobs", "0"]) == 2
    capsys.readouterr()
    assert main(["check", MINIMAL, "--seed", "-1"]) == 2
    capsys.readouterr()


# --- check: determinism -----------------------------------------------------


def test_two_runs_identical_minus_duration(capsys):
    assert main(["check", VERIFY, "--format", "json"]) == 0
    first = capsys.readouterr().out
    assert main(["check", VERIFY, "--format", "json"]) == 0
    second = capsys.readouterr().out
    assert _strip_duration(first) == _strip_duration(second)


def test_jobs_flag_does_not_change_output(capsys):
    assert main(["check", VERIFY, "--format", "json", "--jobs", "4"]) == 0
    parallel = capsys.readouterr().out
    assert main(["check", VERIFY, "--format", "json", "--jobs", "1"]) == 0
    serial = capsys.readouterr().out
    assert _strip_duration(parallel) == _strip_duration(serial)


def test_seed_override_changes_sampled_residuals(tmp_path, capsys):
    config = _sine_config(tmp_path)
    assert main(["check", config, "--format", "json"]) == 0
    default_run = json.loads(capsys.readouterr().out)
    assert main(["check", config, "--format", "json", "--seed", "1"]) == 0
    reseeded = json.loads(capsys.readouterr().out)
    assert reseeded["seed"] == 1
    assert (
        reseeded["checks"][0]["max_residual"]
        != default_run["checks"][0]["max_residual"]
    )


def test_out_flag_writes_file_and_keeps_stdout_clean(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["check", MINIMAL, "--format", "json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["verdict"] == "pass"


def test_unwritable_out_path_exits_two(tmp_path, capsys):
    target = str(tmp_path / "missing" / "report.json")
    assert main(["check", MINIMAL, "--out", target]) == 2
    assert capsys.readouterr().err.startswith("curvcheck: ")


# --- the golden report ------------------------------------------------------


def test_golden_report_reproduced(capsys):
    golden = json.loads((FIXTURES / "golden-report.json").read_text(encoding="utf-8"))
    assert main(["check", VERIFY, "--format", "json"]) == 0
    fresh = json.loads(capsys.readouterr().out)
    for key in ("verdict", "tool_version", "config_digest", "seed"):
        assert fresh[key] == golden[key], key
    assert len(fresh["checks"]) == len(golden["checks"])
    for got, want in zip(fresh["checks"], golden["checks"]):
        for key in ("name", "kind", "samples", "tolerance", "verdict", "detail"):
            assert got[key] == want[key], (want["name"], key)
        if want["max_residual"] is None:
            assert got["max_residual"] is None
        else:
            assert math.isclose(
                got["max_residual"], want["max_residual"], rel_tol=1e-6, abs_tol=1e-12
            ), want["name"]


# --- the tolerance-scale override -------------------------------------------


def test_tol_scale_env_rescues_tight_tolerance(tmp_path, capsys, monkeypatch):
    config = _sine_config(tmp_path, tolerance=1e-30)
    monkeypatch.setenv("CURVCHECK_TOL_SCALE", "1e25")
    assert main(["check", config, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["checks"][0]["tolerance"] == pytest.approx(1e-5)


def test_tol_scale_env_must_be_a_positive_number(capsys, monkeypatch):
    monkeypatch.setenv("CURVCHECK_TOL_SCALE", "banana")
    assert main(["check", MINIMAL]) == 2
    assert "CURVCHECK_TOL_SCALE" in capsys.readouterr().err
    monkeypatch.setenv("CURVCHECK_TOL_SCALE", "-2")
    assert main(["check", MINIMAL]) == 2
    assert "CURVCHECK_TOL_SCALE" in capsys.readouterr().err
