import csv
import importlib.resources
import json
import subprocess
import sys

import jsonschema
import pytest

from hardy_verify.cli import CSV_HEADER, main

SCHEMA = json.loads((importlib.resources.files("hardy_verify") / "schema" / "report.schema.json").read_text())


def run_cli(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    rows = []
    if (out / "summary.csv").exists():
        with open(out / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, rows, report, out


def test_verify_equality_row(tmp_path):
    code, rows, report, out = run_cli(tmp_path, "verify", "--claims", "P1_II", "--p", "2", "--n", "3",
                                      "--r", "1", "--family", "u_k", "--k", "3")
    assert code == 0
    assert len(rows) == 1 and rows[0]["status"] == "EQUALITY"
    assert (out / "summary.csv").read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert report["schema"] == "hardy-verify/1"
    jsonschema.validate(report, SCHEMA)


def test_regime_mismatch_is_config_error(tmp_path, capsys):
    code, rows, report, _ = run_cli(tmp_path, "verify", "--claims", "P1_I", "--p", "2", "--n", "3", "--r", "1")
    assert code == 64 and report is None
    assert "m > 0 requires p > n" in capsys.readouterr().err


def test_sweep_rows_and_order(tmp_path):
    code, rows, report, _ = run_cli(tmp_path, "sweep", "--claims", "P1_II", "P3", "--p", "2",
                                    "--n", "5", "3", "4", "--r", "1")
    assert code == 0
    assert [(r["n"], r["claim_id"]) for r in rows] == [
        ("3", "P1_II"), ("3", "P3"), ("4", "P1_II"), ("4", "P3"), ("5", "P1_II"), ("5", "P3")]
    assert all(r["status"] == "EQUALITY" for r in rows)
    jsonschema.validate(report, SCHEMA)


def test_sweep_invalid_point_continues(tmp_path):
    code, rows, report, _ = run_cli(tmp_path, "sweep", "--claims", "P1_II", "--p", "2", "--n", "3",
                                    "--r", "-1", "1")
    assert code == 2
    assert [r["status"] for r in rows] == ["CONFIG_ERROR", "EQUALITY"]
    jsonschema.validate(report, SCHEMA)


def test_empty_grid(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "sweep", "claims": ["P3"], "p": [2], "n": [], "r": [1]}))
    code, *_ = run_cli(tmp_path, "sweep", "--config", str(cfg))
    assert code == 64


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"claims": ["P1_II"], "p": [2], "n": [3], "r": [1], "k": [3]}))
    code, rows, *_ = run_cli(tmp_path, "verify", "--config", str(cfg), "--n", "4")
    assert code == 0 and rows[0]["n"] == "4"


def test_config_errors_report_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"claims": ["P3"],\n  "p": [2,}')
    assert main(["verify", "--config", str(bad)]) == 64
    assert "line 2 column" in capsys.readouterr().err
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"claims": ["P3"], "colour": "red"}))
    assert main(["verify", "--config", str(unknown)]) == 64
    assert "colour" in capsys.readouterr().err


def test_violation_exit_code(tmp_path):
    code, rows, *_ = run_cli(tmp_path, "verify", "--claims", "EX2", "--p", "2", "--n", "3", "--r", "1",
                             "--literal")
    assert code == 1 and rows[0]["status"] == "VIOLATION"


def test_sharpness_rows(tmp_path):
    code, rows, report, _ = run_cli(tmp_path, "sharpness", "--p", "3", "--n", "2", "--r", "1", "--eps", "0.3")
    assert code == 0 and rows[0]["status"] == "SANDWICH_OK" and rows[0]["param"] == "eps=0.3"
    jsonschema.validate(report, SCHEMA)


def test_optimize_row(tmp_path):
    code, rows, report, _ = run_cli(tmp_path, "optimize", "--p", "3", "--n", "2", "--r", "1",
                                    "--kernel", "exterior-singular", "--grid", "100", "200")
    assert code == 0
    assert rows[0]["claim_id"] == "OPT:exterior-singular" and rows[0]["status"] == "HOLDS"
    assert float(rows[0]["lhs"]) >= float(rows[0]["rhs"])
    jsonschema.validate(report, SCHEMA)


def test_random_profiles_deterministic(tmp_path, monkeypatch):
    args = ("sweep", "--claims", "P1_II", "P2_II", "P3", "--p", "2", "--n", "3", "4", "--r", "1",
            "--profile", "random", "--seed", "5")
    code1, rows1, _, out1 = run_cli(tmp_path, *args, name="a")
    monkeypatch.setenv("HARDY_VERIFY_THREADS", "1")
    code2, _, _, out2 = run_cli(tmp_path, *args, name="b")
    assert code1 == code2 == 0
    assert all(r["status"] == "HOLDS" for r in rows1)
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hardy_verify.cli", "verify", "--claims", "P3", "--p", "2", "--n", "3",
         "--r", "1", "--out", str(tmp_path / "x"), "--formats", "csv"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "EQUALITY" in proc.stdout
    assert (tmp_path / "x" / "summary.csv").exists()
    assert not (tmp_path / "x" / "report.json").exists()
