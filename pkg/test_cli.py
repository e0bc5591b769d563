"""Tests for the command-line interface."""

import csv
import os

from click.testing import CliRunner

from experimentNode import RunResult
from main import cli
from pipeline import PipelineContext
from quantrack.types import Verdict
from traceWriter import TRACE_FILE, read_trace


def invoke(*args):
    return CliRunner().invoke(cli, list(args))


def test_run_reports_verdict(tmp_path, small_config_path):
    result = invoke("run", small_config_path, "--out-dir", str(tmp_path / "cli"), "--no-plots")
    assert result.exit_code == 0, result.output
    assert "verdict: converged" in result.output
    assert os.path.isfile(tmp_path / "cli" / "small" / TRACE_FILE)


def test_run_exit_code_follows_verdict(mocker, small_config_path):
    diverged = RunResult(context=PipelineContext(), verdict=Verdict.DIVERGED, run_dir="somewhere")
    mocker.patch("main.ExperimentNode.run_scenario", return_value=diverged)
    result = invoke("run", small_config_path)
    assert result.exit_code == 2
    assert "verdict: diverged" in result.output


def test_run_invalid_config(write_config):
    path = write_config({"name": "broken", "leader": {"S": [[1.0]]}})
    result = invoke("run", path)
    assert result.exit_code == 1


def test_run_missing_file_is_a_usage_error(tmp_path):
    result = invoke("run", str(tmp_path / "missing.json5"))
    assert result.exit_code == 2
    assert "does not exist" in result.output


def test_certify_prints_report(small_config_path):
    result = invoke("certify", small_config_path)
    assert result.exit_code == 0, result.output
    assert "[resilience]" in result.output
    assert "required_bits" in result.output


def test_replay_round_trip(tmp_path, small_config_path):
    out = tmp_path / "replay"
    assert invoke("run", small_config_path, "--out-dir", str(out)).exit_code == 0
    run_dir = out / "small"

    ok = invoke("replay", str(run_dir))
    assert ok.exit_code == 0, ok.output
    assert "replay ok" in ok.output

    path = run_dir / TRACE_FILE
    rows = read_trace(str(path))
    col = rows[0].index("err_2")
    rows[10][col] = "1"
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(rows)
    bad = invoke("replay", str(path))
    assert bad.exit_code == 1
    assert "replay mismatch at step 9, column err_2" in bad.output


def test_sweep_empty_grid(tmp_path, small_config_path, scenario_path):
    result = invoke("sweep", small_config_path, scenario_path("sweep_empty"), "--out-dir", str(tmp_path / "sw"))
    assert result.exit_code == 0, result.output
    assert "table:" in result.output


def test_sweep_lists_cells(tmp_path, small_config_path, scenario_path):
    result = invoke("sweep", small_config_path, scenario_path("sweep_gamma1"), "--out-dir", str(tmp_path / "sw"),
                    "--seed", "4")
    assert result.exit_code == 0, result.output
    for cell in range(4):
        assert f"cell {cell}:" in result.output
