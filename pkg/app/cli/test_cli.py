"""
Tests for the facet-flow command line.
These check:
1. Exit statuses for passing runs, tolerance failures, usage errors and solver failures
2. The CSV and JSON artifacts each subcommand writes
3. Byte-identical output for repeated runs with the same seed
"""
import json

import pandas as pd
import pytest

from app.cli.main import EXIT_OK, EXIT_SOLVER, EXIT_TOLERANCE, EXIT_USAGE, main
from app.core.config import settings

SMALL_SWEEP = {
    "p_values": [2.0, 3.0],
    "mu_values": [1.0],
    "dims": [1, 2],
    "magnitudes": [0.0, 0.5, 2.0, 4.0],
    "fenchel_young_cases": 50,
    "prox_cases": 50,
}


def _write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _run(tmp_path, command, config=None, *extra, out="out"):
    argv = [command, "--out", str(tmp_path / out)]
    if config is not None:
        argv += ["--config", _write_config(tmp_path, config, name=f"{out}.json")]
    return main(argv + list(extra))


def _report(tmp_path, name, out="out"):
    return json.loads((tmp_path / out / name).read_text())


def test_conjugate_check_small_sweep_passes(tmp_path):
    assert _run(tmp_path, "conjugate-check", SMALL_SWEEP) == EXIT_OK
    sweep = pd.read_csv(tmp_path / "out" / "conjugate_check.csv")
    assert len(sweep) == 16
    report = _report(tmp_path, "conjugate_check.json")
    assert report["passed"]
    assert report["cases"] == 16
    assert report["max_oracle_residual"] <= 1e-6
    assert report["max_oracle_abs_residual"] <= 1e-6
    assert sweep["abs_residual"].max() <= 1e-6
    assert report["max_fenchel_young_residual"] <= 1e-10
    assert report["max_prox_residual"] <= 1e-10


def test_corrupted_formula_fails(tmp_path):
    config = {**SMALL_SWEEP, "corrupt_formula": True}
    assert _run(tmp_path, "conjugate-check", config) == EXIT_TOLERANCE
    assert not _report(tmp_path, "conjugate_check.json")["passed"]


def test_empty_sweep_reports_no_cases(tmp_path):
    config = {"p_values": [], "fenchel_young_cases": 0, "prox_cases": 0}
    assert _run(tmp_path, "conjugate-check", config) == EXIT_OK
    report = _report(tmp_path, "conjugate_check.json")
    assert report["cases"] == 0
    assert "no cases" in report["notes"]


def test_conjugate_check_is_deterministic(tmp_path):
    config = {**SMALL_SWEEP, "fenchel_young_cases": 10, "prox_cases": 10}
    assert _run(tmp_path, "conjugate-check", config, "--seed", "11", out="a") == EXIT_OK
    assert _run(tmp_path, "conjugate-check", config, "--seed", "11", out="b") == EXIT_OK
    for name in ("conjugate_check.csv", "conjugate_check.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_radial_example_reports_facet_value_and_surface_term(tmp_path):
    assert _run(tmp_path, "radial") == EXIT_OK
    report = _report(tmp_path, "radial_report.json")
    assert report["facet_value"] == pytest.approx(3.2, abs=1e-10)
    assert report["surface_coeff"] == pytest.approx(1.2, abs=1e-10)
    assert report["c1"] == pytest.approx(-1.2, abs=1e-10)
    assert report["c2"] == pytest.approx(0.2, abs=1e-10)
    assert any("surface coefficient" in flag for flag in report["flags"])
    assert any("published as satisfying the no-delta condition" in flag for flag in report["flags"])
    bulk = pd.read_csv(tmp_path / "out" / "radial_bulk.csv")
    assert list(bulk.columns) == ["s", "H", "bulk_density", "bulk_density_fd"]
    assert len(bulk) == 101


def test_radial_rejects_facet_outside_domain(tmp_path):
    config = {"profile": {"kind": "facet", "r0": 2.0, "r": 1.0, "facet_slope": -1.0}}
    assert _run(tmp_path, "radial", config) == EXIT_USAGE


def test_radial_steep_facet_fails_hypotheses(tmp_path):
    config = {"profile": {"kind": "facet", "r0": 1.0, "r": 2.0, "facet_slope": -10.0}}
    assert _run(tmp_path, "radial", config) == EXIT_TOLERANCE
    report = _report(tmp_path, "radial_report.json")
    assert report["facet_value"] is None
    assert not report["interval_ok"]
    assert any(flag.startswith("hypotheses fail") for flag in report["flags"])


def test_evolve_zero_final_time_writes_initial_state(tmp_path):
    assert _run(tmp_path, "evolve", {"n": 32, "t_max": 0.0}) == EXIT_OK
    series = pd.read_csv(tmp_path / "out" / "flow_series.csv")
    assert len(series) == 1
    assert series["t"].iloc[0] == 0.0
    assert _report(tmp_path, "flow_summary.json")["steps"] == 0


def test_evolve_is_deterministic(tmp_path):
    config = {"n": 32, "tau": 1e-3, "t_max": 5e-3, "initial": "hat", "amplitude": 0.5}
    assert _run(tmp_path, "evolve", config, out="a") == EXIT_OK
    assert _run(tmp_path, "evolve", config, out="b") == EXIT_OK
    for name in ("flow_series.csv", "flow_final.csv", "flow_summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_evolve_solver_failure(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "MAX_INNER_ITERATIONS", 3)
    assert _run(tmp_path, "evolve", {"n": 64, "t_max": 1e-3}, "--tol", "1e-14") == EXIT_SOLVER


def test_slope_check_writes_rows(tmp_path):
    config = {"n": 512, "taus": [1e-2, 5e-3], "facet_tol": 0.5}
    assert _run(tmp_path, "slope-check", config) == EXIT_OK
    rows = pd.read_csv(tmp_path / "out" / "slope_check.csv")
    assert list(rows["tau"]) == [1e-2, 5e-3]
    report = _report(tmp_path, "slope_check.json")
    assert report["passed"]
    assert report["facet_value"] == pytest.approx(3.2, rel=1e-12)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["unknown"],
        ["radial", "--tol", "abc"],
        ["radial", "--tol", "-1"],
        ["radial", "--config", "does-not-exist.json"],
    ],
)
def test_usage_errors(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path)] if argv else argv) == EXIT_USAGE


def test_malformed_config_is_a_usage_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["evolve", "--config", str(path), "--out", str(tmp_path)]) == EXIT_USAGE
