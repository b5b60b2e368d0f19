import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gadsim.structural import (
    DriveTrain, TowerModel, TurbineState, build_tower, free_decay_estimate,
    nrel5mw_drivetrain, nrel5mw_tower, nrel5mw_tower_mass, simulate_tower,
    step_drivetrain, step_tower,
)


# ---------------------------------------------------------------- drive-train
def test_equivalent_inertia_matches_hand_arithmetic():
    # 534.116 + 35444067 / 9409, worked by hand: 3767.0387926453395... + 534.116
    expected = 534.116 + 35444067.0 / 9409.0
    assert nrel5mw_drivetrain().J == pytest.approx(expected, rel=1e-12)
    assert f"{nrel5mw_drivetrain().J:.6g}" == "4301.15"


def test_drivetrain_rejects_bad_parameters():
    with pytest.raises(ValueError):
        DriveTrain(J_g=0.0, J_r=1.0, N=1.0)
    with pytest.raises(ValueError):
        DriveTrain(J_g=1.0, J_r=1.0, N=0.5)
    with pytest.raises(ValueError):
        DriveTrain(J_g=1.0, J_r=1.0, N=2.0, eta=1.5)


def test_drivetrain_equilibrium_leaves_speed_unchanged():
    dtm = nrel5mw_drivetrain()
    state = TurbineState(omega_g=80.0)
    T_g = 2.0e4
    assert step_drivetrain(0.02, state, dtm.N * T_g, T_g, dtm) == 80.0


def test_drivetrain_unit_net_torque_gives_unit_speed_change():
    dtm = nrel5mw_drivetrain()
    state = TurbineState(omega_g=50.0)
    T_g = 1.0e4
    T_r = dtm.N * T_g + dtm.J * dtm.N
    assert step_drivetrain(1.0, state, T_r, T_g, dtm) == pytest.approx(51.0, rel=1e-14)


def test_drivetrain_speed_is_clamped_at_zero():
    dtm = nrel5mw_drivetrain()
    state = TurbineState(omega_g=0.1)
    assert step_drivetrain(1.0, state, 0.0, 4.0e4, dtm) == 0.0


def test_drivetrain_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_drivetrain(0.0, TurbineState(omega_g=1.0), 0.0, 0.0, nrel5mw_drivetrain())


def test_generator_power_uses_efficiency():
    dtm = nrel5mw_drivetrain()
    assert dtm.generator_power(1.0e4, 100.0) == pytest.approx(0.944 * 1.0e6)


def _spin(dtm, dt, t_end, omega0=60.0, T_r=2.0e6, k=3.0):
    """Drive-train under constant rotor torque and a quadratic generator load."""
    state = TurbineState(omega_g=omega0)
    for _ in range(int(round(t_end / dt))):
        omega = step_drivetrain(dt, state, T_r, k * state.omega_g ** 2, dtm)
        state = state.evolve(omega_g=omega)
    return state.omega_g


def test_drivetrain_convergence_is_first_order():
    dtm = nrel5mw_drivetrain()
    dt, t_end = 0.4, 20.0
    ref = _spin(dtm, dt / 64, t_end)
    e1 = abs(_spin(dtm, dt, t_end) - ref)
    e2 = abs(_spin(dtm, dt / 2, t_end) - ref)
    order = math.log2(e1 / e2)
    assert 0.8 <= order <= 1.2


def test_drivetrain_power_balance_defect_is_second_order_per_step():
    dtm = nrel5mw_drivetrain()
    omega0, T_r, T_g = 70.0, 2.5e6, 2.0e4

    def defects(dt):
        state = TurbineState(omega_g=omega0)
        omega1 = step_drivetrain(dt, state, T_r, T_g, dtm)
        dke = 0.5 * dtm.J * (omega1 ** 2 - omega0 ** 2)
        net = T_r / dtm.N - T_g
        left = net * omega0 * dt
        trapezoid = net * 0.5 * (omega0 + omega1) * dt
        return abs(dke - left), abs(dke - trapezoid) / abs(dke)

    d1, trap1 = defects(0.1)
    d2, trap2 = defects(0.05)
    assert 1.6 <= math.log2(d1 / d2) <= 2.4
    assert trap1 < 1e-12 and trap2 < 1e-12


# ---------------------------------------------------------------------- tower
def test_build_tower_unit_natural_frequency():
    tower = build_tower(1.0 / (2.0 * np.pi), 0.0, 1.0)
    assert tower.K_T == pytest.approx(1.0, rel=1e-14)
    assert tower.B_T == 0.0


def test_build_tower_reference_masses():
    M_T = 240000.0 + 56780.0 + 3 * 17848.77
    tower = nrel5mw_tower()
    assert nrel5mw_tower_mass() == pytest.approx(M_T, rel=1e-15)
    assert tower.K_T == pytest.approx(M_T * (2.0 * np.pi * 0.3240) ** 2, rel=1e-14)
    assert tower.B_T == pytest.approx(2.0 * 0.01 * np.sqrt(tower.K_T * M_T), rel=1e-14)


@pytest.mark.parametrize("f1, d1, M_T", [(0.3, 1.0, 1.0), (0.0, 0.1, 1.0),
                                         (0.3, -0.1, 1.0), (0.3, 0.1, 0.0)])
def test_build_tower_rejects_invalid_ranges(f1, d1, M_T):
    with pytest.raises(ValueError):
        build_tower(f1, d1, M_T)


def test_tower_model_rejects_negative_damping():
    with pytest.raises(ValueError):
        TowerModel(M_T=1.0, B_T=-1.0, K_T=1.0, f1=1.0, d1=0.0)


@pytest.mark.parametrize("method", ["midpoint", "symplectic_euler"])
def test_static_deflection(method):
    tower = nrel5mw_tower()
    T0 = 4.0e5
    _, x, v = simulate_tower(tower, 0.0, 0.0, 0.05, 40000, thrust=T0, method=method)
    assert x[-1] == pytest.approx(T0 / tower.K_T, rel=1e-6)
    assert abs(v[-1]) < 1e-8


def test_free_decay_frequency_and_damping():
    tower = nrel5mw_tower()
    t, x, _ = simulate_tower(tower, 0.1, 0.0, 0.02, 3000)
    freq, zeta = free_decay_estimate(t, x)
    assert freq == pytest.approx(0.3240 * np.sqrt(1.0 - 0.01 ** 2), rel=0.01)
    assert zeta == pytest.approx(0.01, abs=0.003)


def test_free_decay_amplitude_ratio_over_one_period():
    tower = nrel5mw_tower()
    t, x, _ = simulate_tower(tower, 0.1, 0.0, 0.02, 3000)
    up = np.nonzero((x[:-1] < 0.0) & (x[1:] >= 0.0))[0]
    peaks = np.array([x[a:b].max() for a, b in zip(up[:-1], up[1:])])
    ratio = np.mean(peaks[1:] / peaks[:-1])
    expected = np.exp(-2.0 * np.pi * 0.01 / np.sqrt(1.0 - 0.01 ** 2))
    assert ratio == pytest.approx(expected, rel=0.05)


def test_free_decay_estimate_needs_crossings():
    with pytest.raises(ValueError):
        free_decay_estimate(np.arange(5.0), np.ones(5))


def test_step_tower_reports_acceleration_at_new_state():
    tower = nrel5mw_tower()
    state = TurbineState(omega_g=0.0, x_T=0.05, v_T=-0.02)
    x, v, a = step_tower(0.02, state, 3.0e5, tower)
    assert a == pytest.approx((3.0e5 - tower.B_T * v - tower.K_T * x) / tower.M_T, rel=1e-14)


def test_step_tower_rejects_unknown_method_and_bad_dt():
    tower = nrel5mw_tower()
    with pytest.raises(ValueError):
        step_tower(0.02, TurbineState(omega_g=0.0), 0.0, tower, "rk4")
    with pytest.raises(ValueError):
        step_tower(-0.02, TurbineState(omega_g=0.0), 0.0, tower)


def test_thrust_step_from_rest_moves_tower_downwind():
    tower = nrel5mw_tower()
    x, v, a = step_tower(0.02, TurbineState(omega_g=0.0), 5.0e5, tower)
    assert v > 0.0 and x > 0.0


@settings(max_examples=40, deadline=None)
@given(x0=st.floats(-0.5, 0.5), v0=st.floats(-0.5, 0.5),
       dt=st.sampled_from([0.005, 0.02, 0.05, 0.2]),
       d1=st.floats(0.002, 0.2))
def test_tower_energy_strictly_decreases_without_thrust(x0, v0, dt, d1):
    if abs(x0) + abs(v0) < 1e-3:
        return
    tower = build_tower(0.3240, d1, nrel5mw_tower_mass())
    _, x, v = simulate_tower(tower, x0, v0, dt, 200)
    energy = tower.energy(x, v)
    assert np.all(np.diff(energy) < 0.0)


def _tower_final(tower, dt, t_end):
    _, x, v = simulate_tower(tower, 0.0, 0.0, dt, int(round(t_end / dt)), thrust=5.0e5)
    return np.array([x[-1], v[-1]])


def test_tower_convergence_is_second_order():
    tower = nrel5mw_tower()
    dt, t_end = 0.1, 10.0
    ref = _tower_final(tower, dt / 64, t_end)
    e1 = np.linalg.norm(_tower_final(tower, dt, t_end) - ref)
    e2 = np.linalg.norm(_tower_final(tower, dt / 2, t_end) - ref)
    order = math.log2(e1 / e2)
    assert 1.6 <= order <= 2.4


# --------------------------------------------------------------------- state
def test_turbine_state_invariants():
    with pytest.raises(ValueError):
        TurbineState(omega_g=-1.0)
    with pytest.raises(ValueError):
        TurbineState(omega_g=1.0, x_T=float("nan"))
    s = TurbineState(omega_g=97.0)
    assert s.omega_r(97.0) == 1.0
    assert s.evolve(x_T=0.3).x_T == 0.3 and s.x_T == 0.0
