import json

import pytest

from delayflock.cli import EXIT_OK, EXIT_VALIDATION, main

SCENARIO = {
    "graph": {"n": 4, "arcs": [[1, 2], [2, 3], [3, 1], [3, 4]]},
    "weight": {"type": "cucker-smale", "kappa": 1.0, "beta": 0.25},
    "delay": {"type": "constant", "tau": 1.0},
    "positions": [[1, 0], [0, 1], [-1, 0], [0, -1]],
    "velocities": [[1, -2], [3, -4], [5, 6], [-7, -8]],
    "velocity_scale": 1e-9,
    "t_end": 3.0,
    "dt": 0.05,
}


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SCENARIO))
    return str(path)


def test_analyze_graph(scenario_file, capsys):
    assert main(["analyze-graph", scenario_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "gamma_g=2" in out
    assert "n_infinity=1" in out
    assert "roots=[1, 2, 3]" in out


def test_analyze_graph_missing_file(capsys):
    assert main(["analyze-graph", "/nonexistent.json"]) == EXIT_VALIDATION
    assert "error:" in capsys.readouterr().err


def test_check_condition(scenario_file, capsys):
    assert main(["check-condition", scenario_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict=guaranteed" in out
    assert "regime=critical" in out


def test_simulate(scenario_file, tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["simulate", scenario_file, "--t-end", "2",
                 "--out", str(out_dir)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "final velocity spread" in out
    assert (out_dir / "scenario.json_trajectory.csv").exists()
    assert (out_dir / "scenario.json_diameters.csv").exists()
    assert (out_dir / "scenario.json_certificate.txt").exists()


def test_simulate_invalid_scenario(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"graph": {"n": 2, "arcs": [[1, 2]]}}))
    assert main(["simulate", str(path)]) == EXIT_VALIDATION
    assert "error:" in capsys.readouterr().err


def test_reproduce(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DELAYFLOCK_OUT", str(tmp_path))
    assert main(["reproduce", "fig5-digraph"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict=not-guaranteed" in out
    assert (tmp_path / "fig5-digraph_trajectory.csv").exists()


def test_sweep(scenario_file, tmp_path, capsys):
    assert main(["sweep", scenario_file, "--axis", "scale=0.5:2:2",
                 "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "2 points" in out
    assert (tmp_path / "sweep.csv").exists()


def test_sweep_bad_axis(scenario_file, capsys):
    assert main(["sweep", scenario_file, "--axis", "scale=oops"]) == EXIT_VALIDATION
    assert "error:" in capsys.readouterr().err
