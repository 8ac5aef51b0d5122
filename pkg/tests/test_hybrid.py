import numpy as np
import pytest
from numpy.testing import assert_allclose

from raman.common import DivergenceError, ScenarioError, to_dbm
from raman.hybrid import (
    MULTIPLIER_FLOOR,
    correct_pumps_to_boundary,
    dpc_correction,
    initialize_state,
    pump_error,
    run_hybrid,
)
from raman.link import build_coupling_matrix, build_grid, zero_gain_model
from raman.propagator import propagate, trapezoid_operator
from raman.pump_ivp import solve_pump_only
from raman.state import SolverParams, Stage, Status

from conftest import small_link


# -----------------------------------------------------------------------------
# operaciones elementales
# -----------------------------------------------------------------------------

def test_initialize_state_scales_down(link):
    grid = build_grid(link.length, link.step)
    params = SolverParams()
    state = initialize_state(link, grid, params, factor_pump=10.0)

    sig, pumps = link.signal_index, link.pump_index
    assert_allclose(state.profile[sig, 0], link.boundary_powers[sig] / 4.0)
    assert_allclose(
        state.profile[sig],
        (link.boundary_powers[sig] / 4.0)[:, None] * np.exp(-np.outer(link.alphas[sig], grid.points)),
    )
    assert_allclose(state.pump_boundary_scaled, link.boundary_powers[pumps] / 10.0)
    assert_allclose(state.profile[pumps, -1], link.boundary_powers[pumps] / 10.0)
    assert state.stage == Stage.SIGNAL_SCALE_UP
    assert state.cl_current == params.cl_initial
    assert state.iteration == 0


def test_initialize_state_rejects_factor_outside_ladder(link):
    with pytest.raises(ScenarioError):
        initialize_state(link, build_grid(link.length, link.step), SolverParams(), factor_pump=3.0)


def test_correct_pumps_ratio_and_independence():
    P = np.array([
        [1e-3, 5e-4, 2e-4],
        [0.10, 0.20, 0.30],
        [0.05, 0.10, 0.36],
    ])
    out = correct_pumps_to_boundary(P, np.array([1, 2]), np.array([0.36, 0.36]))
    assert_allclose(out[1], P[1] * 1.2)
    assert_allclose(out[2], P[2])
    assert out[1, -1] == 0.36
    assert_allclose(out[0], P[0], rtol=0, atol=0)
    assert P[1, -1] == 0.30


@pytest.mark.parametrize("bad", [0.0, np.nan, np.inf])
def test_correct_pumps_signals_divergence(bad):
    P = np.array([[1e-3, 1e-3], [0.1, bad]])
    with pytest.raises(DivergenceError):
        correct_pumps_to_boundary(P, np.array([1]), np.array([0.3]))


def test_pump_error_sign():
    P = np.array([[1e-3, 1e-3], [0.1, 0.30], [0.1, 0.40], [0.1, 0.36]])
    err = pump_error(P, np.array([1, 2, 3]), np.array([0.36, 0.36, 0.36]))
    assert_allclose(err, [0.06, -0.04, 0.0], atol=1e-15)


def test_dpc_correction_multipliers():
    params = SolverParams(ch=3.0, cl_initial=0.1)
    P = np.ones((4, 3))
    boundary = np.array([1.0, 1.0, 1.0])
    err = np.array([0.10, -0.10, 0.0])
    out = dpc_correction(P, np.array([1, 2, 3]), err, boundary, params)
    assert_allclose(out[1], 1.01)
    assert_allclose(out[2], 0.70)
    assert_allclose(out[3], 1.0)
    assert_allclose(out[0], 1.0)


def test_dpc_correction_uses_current_cl_and_floor():
    params = SolverParams()
    P = np.ones((2, 2))
    out = dpc_correction(P, np.array([1]), np.array([0.5]), np.array([1.0]), params, cl=0.5)
    assert_allclose(out[1], 1.25)
    out = dpc_correction(P, np.array([1]), np.array([-2.0]), np.array([1.0]), params)
    assert_allclose(out[1], MULTIPLIER_FLOOR)


# -----------------------------------------------------------------------------
# corridas completas
# -----------------------------------------------------------------------------

def test_signals_only_without_gain_is_analytic():
    scenario = small_link(pump_mw=(), gain_model=zero_gain_model(), length=20.0, step=0.5)
    P, report = run_hybrid(scenario)
    grid = build_grid(20.0, 0.5)

    assert report.status == Status.CONVERGED
    # 4 pasos de 2 dB para recuperar los 6 dB de factor_signal, más el traspaso
    assert report.iterations == 5
    expected = scenario.boundary_powers[:, None] * np.exp(-np.outer(scenario.alphas, grid.points))
    assert_allclose(P, expected, rtol=1e-10)


def test_attenuation_only_with_pumps(zero_gain_link):
    scenario = zero_gain_link
    P, report = run_hybrid(scenario)
    grid = build_grid(scenario.length, scenario.step)
    z, L = grid.points, scenario.length

    assert report.converged
    sig, pumps = scenario.signal_index, scenario.pump_index
    b, a = scenario.boundary_powers, scenario.alphas
    assert_allclose(P[sig], b[sig, None] * np.exp(-np.outer(a[sig], z)), rtol=1e-10)
    assert_allclose(P[pumps], b[pumps, None] * np.exp(-np.outer(a[pumps], L - z)), rtol=1e-10)


def test_undepleted_pumps_match_pump_only_solution():
    scenario = small_link(signal_dbm=-60.0)
    P, report = run_hybrid(scenario)
    grid = build_grid(scenario.length, scenario.step)
    pumps = scenario.pump_index
    reference = solve_pump_only(scenario, grid, scenario.boundary_powers[pumps])

    assert report.converged
    assert np.max(np.abs(to_dbm(P[pumps]) - to_dbm(reference))) < 0.01


def test_converged_profile_is_a_fixed_point(link):
    params = SolverParams()
    P, report = run_hybrid(link, params)

    assert report.status == Status.CONVERGED
    assert report.max_abs_error() < params.tol
    assert np.all(np.isfinite(P)) and np.all(P > 0)
    assert_allclose(P[link.signal_index, 0], link.boundary_powers[link.signal_index], rtol=0, atol=0)

    grid = build_grid(link.length, link.step)
    again = propagate(P, build_coupling_matrix(link), link.alphas, link.directions, grid, trapezoid_operator(grid))
    assert np.max(np.abs(again - P) / P) < 10 * params.tol


def test_trace_covers_every_iteration(link):
    _, report = run_hybrid(link)
    assert [r.iteration for r in report.trace] == list(range(1, report.iterations + 1))
    stages = [r.stage for r in report.trace]
    assert stages[0] == Stage.SIGNAL_SCALE_UP
    assert stages[-1] == Stage.DPC
    assert all(len(r.pump_error) == link.n_pumps for r in report.trace)


def test_pump_scale_up_from_reduced_factor(link):
    params = SolverParams()
    P, report = run_hybrid(link, params, factor_pump=5.0)
    assert report.converged
    assert report.pump_factor_used == 5.0
    assert any(r.stage == Stage.PUMP_SCALE_UP for r in report.trace)
    # 5× son ~7 dB: al menos 14 pasos de 0.5 dB
    assert sum(r.stage == Stage.PUMP_SCALE_UP for r in report.trace) >= 14


def test_runs_are_deterministic(link):
    P1, r1 = run_hybrid(link)
    P2, r2 = run_hybrid(link)
    assert r1.iterations == r2.iterations
    assert r1.status == r2.status
    assert_allclose(P1, P2, rtol=0, atol=0)


def test_huge_pumps_diverge_without_raising():
    scenario = small_link(pump_mw=(1e6,))
    P, report = run_hybrid(scenario)
    assert report.status == Status.DIVERGED
    assert not report.converged
    assert report.message


def test_iteration_cap_without_oscillation(link):
    _, report = run_hybrid(link, SolverParams(max_iterations=3))
    assert report.status == Status.ITERATION_CAPPED
    assert report.iterations == 3


def test_sustained_oscillation_reduces_cl_and_converges():
    # CL = CH = 2 invierte el signo del error en cada corrección
    scenario = small_link(pump_mw=(300.0,))
    params = SolverParams(ch=2.0, cl_initial=2.0, tol=1e-8, oscillation_check_interval=20)
    _, report = run_hybrid(scenario, params)

    assert report.cl_history
    first_iteration, first_cl = report.cl_history[0]
    assert first_iteration == 20
    assert first_cl < 2.0 / 2
    cls = [cl for _, cl in report.cl_history]
    assert all(b < a for a, b in zip(cls, cls[1:]))
    assert report.status == Status.CONVERGED
