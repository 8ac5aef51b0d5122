import numpy as np
import pytest
from numpy.testing import assert_allclose

from raman.common import (
    ScenarioError,
    db_per_km_to_linear,
    dbm_to_watt,
    from_dbm,
    to_dbm,
    watt_to_dbm,
)
from raman.link import (
    BoundaryEnd,
    ChannelSpec,
    Direction,
    LinkScenario,
    RamanGainModel,
    TiltProfile,
    build_coupling_matrix,
    build_grid,
    make_cl_scenario,
    make_cls_scenario,
    make_link,
    triangular_gain_model,
    zero_gain_model,
)


# -----------------------------------------------------------------------------
# unidades
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("dbm, watt", [(0.0, 1e-3), (30.0, 1.0), (-10.0, 1e-4)])
def test_dbm_watt_conversion(dbm, watt):
    assert dbm_to_watt(dbm) == pytest.approx(watt, rel=1e-12)
    assert watt_to_dbm(watt) == pytest.approx(dbm, abs=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1e-3])
def test_watt_to_dbm_rejects_non_positive(bad):
    with pytest.raises(ValueError):
        watt_to_dbm(bad)


def test_vectorised_units_round_trip():
    p = np.array([1e-6, 1e-3, 0.36])
    assert_allclose(from_dbm(to_dbm(p)), p, rtol=1e-12)


def test_attenuation_in_linear_units():
    assert db_per_km_to_linear(0.2) == pytest.approx(0.2 / 4.3429448, rel=1e-6)
    assert_allclose(db_per_km_to_linear([0.2, 0.0]), [0.04605, 0.0], atol=1e-5)


# -----------------------------------------------------------------------------
# grilla
# -----------------------------------------------------------------------------

@pytest.mark.parametrize("length, step, points", [
    (100, 25, [0, 25, 50, 75, 100]),
    (10, 10, [0, 10]),
    (100, 30, [0, 30, 60, 90, 100]),
])
def test_build_grid(length, step, points):
    grid = build_grid(length, step)
    assert_allclose(grid.points, points)
    assert grid.n_steps == len(points) - 1
    assert grid.points[-1] == length


def test_build_grid_tolerates_inexact_division():
    grid = build_grid(100.0, 0.1)
    assert grid.n_steps == 1000
    assert grid.points[-1] == 100.0


@pytest.mark.parametrize("length, step", [(0, 1), (10, 0), (10, -1), (5, 10)])
def test_build_grid_rejects_invalid(length, step):
    with pytest.raises(ScenarioError):
        build_grid(length, step)


# -----------------------------------------------------------------------------
# canales y escenario
# -----------------------------------------------------------------------------

def test_channel_boundary_end_follows_direction():
    assert ChannelSpec(190.0, Direction.FORWARD, 0.04, 1e-3).boundary_end == BoundaryEnd.START
    assert ChannelSpec(205.0, -1, 0.04, 0.3).boundary_end == BoundaryEnd.END


def test_channel_rejects_wrong_boundary_end():
    with pytest.raises(ScenarioError):
        ChannelSpec(205.0, Direction.BACKWARD, 0.04, 0.3, BoundaryEnd.START)


@pytest.mark.parametrize("kwargs", [
    {"center_frequency": 0.0},
    {"attenuation": -0.1},
    {"boundary_power": 0.0},
])
def test_channel_invariants(kwargs):
    base = {"center_frequency": 190.0, "direction": Direction.FORWARD, "attenuation": 0.04, "boundary_power": 1e-3}
    with pytest.raises(ScenarioError):
        ChannelSpec(**{**base, **kwargs})


def test_scenario_requires_sorted_frequencies():
    chs = (
        ChannelSpec(191.0, Direction.FORWARD, 0.04, 1e-3),
        ChannelSpec(190.0, Direction.FORWARD, 0.04, 1e-3),
    )
    with pytest.raises(ScenarioError):
        LinkScenario(chs, 10.0, 1.0, zero_gain_model())


def test_scenario_requires_contiguous_blocks():
    chs = (
        ChannelSpec(190.0, Direction.FORWARD, 0.04, 1e-3),
        ChannelSpec(200.0, Direction.BACKWARD, 0.04, 0.1),
        ChannelSpec(201.0, Direction.FORWARD, 0.04, 1e-3),
    )
    with pytest.raises(ScenarioError):
        LinkScenario(chs, 10.0, 1.0, zero_gain_model())


def test_scenario_requires_a_signal():
    chs = (ChannelSpec(200.0, Direction.BACKWARD, 0.04, 0.1),)
    with pytest.raises(ScenarioError):
        LinkScenario(chs, 10.0, 1.0, zero_gain_model())


def test_make_link_sorts_and_indexes():
    scenario = make_link([191.0, 190.0], [1e-3, 2e-3], [205.0], [0.3], length=10.0, step=1.0)
    assert_allclose(scenario.frequencies, [190.0, 191.0, 205.0])
    assert_allclose(scenario.boundary_powers, [2e-3, 1e-3, 0.3])
    assert scenario.signal_index.tolist() == [0, 1]
    assert scenario.pump_index.tolist() == [2]


def test_make_link_per_channel_attenuation():
    scenario = make_link([190.0], [1e-3], [205.0], [0.3], length=10.0, step=1.0, attenuation_db_km=[0.2, 0.25])
    assert_allclose(scenario.alphas, db_per_km_to_linear([0.2, 0.25]))
    with pytest.raises(ScenarioError):
        make_link([190.0], [1e-3], [205.0], [0.3], length=10.0, step=1.0, attenuation_db_km=[0.2, 0.2, 0.2])


# -----------------------------------------------------------------------------
# espectro y matriz de acople
# -----------------------------------------------------------------------------

def test_triangular_gain_shape():
    model = triangular_gain_model(peak=0.4, peak_shift=13.2, cutoff=15.0)
    assert model.gain(0.0) == 0.0
    assert model.gain(13.2) == pytest.approx(0.4)
    assert model.gain(6.6) == pytest.approx(0.2)
    assert model.gain(15.0) == 0.0
    assert model.gain(20.0) == 0.0


def test_gain_model_validation():
    with pytest.raises(ScenarioError):
        RamanGainModel((0.0, 1.0), (0.1, 0.2))
    with pytest.raises(ScenarioError):
        RamanGainModel((0.0, 2.0, 1.0), (0.0, 0.1, 0.2))
    with pytest.raises(ScenarioError):
        RamanGainModel((0.0, 1.0), (0.0, -0.1))


def test_coupling_matrix_two_channels_without_scaling():
    model = triangular_gain_model(frequency_scaling=False)
    scenario = make_link([190.0, 200.0], [1e-3, 1e-3], [], [], length=10.0, step=1.0, gain_model=model)
    G = build_coupling_matrix(scenario)
    g = model.gain(10.0)
    assert G[0, 1] == pytest.approx(g)
    assert G[1, 0] == pytest.approx(-g)
    assert_allclose(G + G.T, 0.0)


def test_coupling_matrix_sign_structure_and_scaling():
    scenario = make_link([190.0, 195.0, 200.0], [1e-3] * 3, [], [], length=10.0, step=1.0)
    G = build_coupling_matrix(scenario)
    assert_allclose(np.diag(G), 0.0)
    f = scenario.frequencies
    for i in range(3):
        for j in range(3):
            if i != j:
                assert np.sign(G[i, j]) == np.sign(f[j] - f[i])
    assert G[2, 0] == pytest.approx(-(200.0 / 190.0) * G[0, 2])


def test_coupling_matrix_single_channel_and_beyond_cutoff():
    single = make_link([190.0], [1e-3], [], [], length=10.0, step=1.0)
    assert_allclose(build_coupling_matrix(single), [[0.0]])
    far = make_link([180.0, 200.0], [1e-3, 1e-3], [], [], length=10.0, step=1.0)
    assert_allclose(build_coupling_matrix(far), 0.0)


# -----------------------------------------------------------------------------
# escenarios de prueba
# -----------------------------------------------------------------------------

def test_cl_scenario_layout():
    scenario = make_cl_scenario(0.0, 1.0)
    assert scenario.n_signals == 76
    assert scenario.n_pumps == 5
    assert scenario.frequencies[0] == pytest.approx(186.0)
    assert scenario.frequencies[75] == pytest.approx(195.375)
    assert_allclose(np.diff(scenario.frequencies[:76]), 0.125)
    assert_allclose(scenario.boundary_powers[scenario.pump_index], [0.180, 0.130, 0.200, 0.320, 0.360])
    assert_allclose(scenario.boundary_powers[scenario.signal_index], 1e-3)


def test_cl_scenario_adjustment_divides_pumps():
    scenario = make_cl_scenario(0.0, 0.5)
    pumps = dict(zip(scenario.frequencies[scenario.pump_index], scenario.boundary_powers[scenario.pump_index]))
    assert pumps[210.56] == pytest.approx(0.720)
    assert pumps[204.51] == pytest.approx(0.260)


@pytest.mark.parametrize("adjustment", [0.0, -1.0])
def test_cl_scenario_rejects_bad_adjustment(adjustment):
    with pytest.raises(ScenarioError):
        make_cl_scenario(0.0, adjustment)


def test_cls_scenario_layout():
    scenario = make_cls_scenario(adjustment=1.0)
    assert scenario.n_channels == 119
    assert scenario.n_signals == 114
    assert min(scenario.frequencies[scenario.pump_index]) == pytest.approx(205.55)


def test_flat_tilt_equals_uniform():
    flat = make_cls_scenario(TiltProfile(mean_dbm=0.0, tilt_db=0.0), tilt_k=1.0)
    uniform = make_cls_scenario(0.0)
    assert_allclose(flat.boundary_powers, uniform.boundary_powers)


def test_tilt_profile_spans_tilt_db():
    powers = TiltProfile(mean_dbm=0.0, tilt_db=3.0).powers_dbm(np.array([186.0, 190.0, 194.0]), k=2.0)
    assert_allclose(powers, [-3.0, 0.0, 3.0])


def test_builders_are_deterministic():
    a = make_cl_scenario(-3.0, 0.7)
    b = make_cl_scenario(-3.0, 0.7)
    assert a == b
    assert_allclose(build_coupling_matrix(a), build_coupling_matrix(b), rtol=0, atol=0)
