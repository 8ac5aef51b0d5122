"""Corridas a escala real sobre los sistemas C+L de referencia (marcadas slow)."""
import csv
import json

import numpy as np
import pytest

import bench
from raman.hybrid import run_hybrid
from raman.link import NON_UNIFORM_PROFILE, build_coupling_matrix, build_grid, make_cl_scenario
from raman.oracle import max_db_error, solve_bvp_shooting
from raman.propagator import propagate, trapezoid_operator
from raman.scenario_file import cl_document
from raman.solver import run_with_pump_factor_escalation
from raman.state import SolverParams, Status

pytestmark = pytest.mark.slow


def _assert_fixed_point(scenario, P, tol):
    grid = build_grid(scenario.length, scenario.step)
    again = propagate(P, build_coupling_matrix(scenario), scenario.alphas, scenario.directions, grid, trapezoid_operator(grid))
    assert np.max(np.abs(again - P) / P) < 10 * tol


@pytest.fixture(scope="module")
def cl_uniform():
    return make_cl_scenario(0.0, 1.0)


def test_hybrid_matches_shooting_on_cl(cl_uniform):
    params = SolverParams()
    P, report = run_with_pump_factor_escalation(cl_uniform, params)
    reference = solve_bvp_shooting(cl_uniform, build_grid(cl_uniform.length, cl_uniform.step), tol=params.tol)

    assert report.status == Status.CONVERGED
    assert reference.converged
    assert max_db_error(P, reference.profile) < 0.05
    _assert_fixed_point(cl_uniform, P, params.tol)


def test_shooting_residual_decreases(cl_uniform):
    tol = SolverParams().tol
    reference = solve_bvp_shooting(cl_uniform, build_grid(cl_uniform.length, cl_uniform.step), tol=tol)
    res = reference.residuals

    assert reference.converged
    assert len(res) > 1
    assert res[-1] < tol < res[0]
    # el residuo no baja en cada paso, pero su envolvente por bloques de 5 sí
    blocks = [max(res[i:i + 5]) for i in range(0, len(res), 5)]
    assert all(b < a for a, b in zip(blocks, blocks[1:]))


@pytest.mark.parametrize("signal_dbm", [-5.0, 0.0, 5.0, 10.0])
@pytest.mark.parametrize("adjustment", [1.0, 0.7])
def test_convergence_region(signal_dbm, adjustment):
    params = SolverParams()
    scenario = make_cl_scenario(signal_dbm, adjustment)
    P, report = run_with_pump_factor_escalation(scenario, params)

    assert report.status == Status.CONVERGED
    assert report.iterations <= params.max_iterations
    _assert_fixed_point(scenario, P, params.tol)


@pytest.mark.parametrize("signal_dbm", [-5.0, 0.0, 5.0, 10.0])
def test_strong_pumps_do_not_converge(signal_dbm):
    _, report = run_with_pump_factor_escalation(make_cl_scenario(signal_dbm, 0.1))
    assert report.status in (Status.DIVERGED, Status.OSCILLATING)


def test_forced_cl_triggers_oscillation_control(cl_uniform):
    params = SolverParams(cl_initial=1.6)
    _, report = run_hybrid(cl_uniform, params)

    assert report.cl_history
    previous = params.cl_initial
    for _, cl in report.cl_history:
        assert cl < previous / 2
        previous = cl
    assert report.status == Status.CONVERGED


def test_hybrid_is_faster_than_shooting(tmp_path):
    path = tmp_path / "cl_tilt.json"
    path.write_text(
        json.dumps(cl_document({"mean_dbm": 0, "tilt_db": NON_UNIFORM_PROFILE.tilt_db, "k": 1})),
        encoding="utf-8",
    )
    code = bench.cli_compare(path, SolverParams(), tmp_path, repetitions=1)
    assert code == bench.EXIT_OK

    with open(tmp_path / "cl_tilt_comparison.csv", newline="", encoding="utf-8") as f:
        (row,) = list(csv.DictReader(f))
    assert float(row["max_db_error"]) < 0.05
    assert float(row["time_gain"]) > 1
    assert "Ganancia de tiempo" in (tmp_path / "cl_tilt_comparison.md").read_text(encoding="utf-8")


def test_hopeless_case_exhausts_the_ladder():
    _, report = run_with_pump_factor_escalation(make_cl_scenario(0.0, 0.001, step=0.5))
    assert report.status == Status.DIVERGED
    assert report.divergence_flag
    assert report.pump_factor_used == 15.0
