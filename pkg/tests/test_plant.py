import math

import numpy as np
import pytest

from src.core.errors import DomainError
from src.core.vehicle import DriverInputs, deg2rad
from src.models.plant import (ActuatorConfig, MeasurementNoise, Plant, PlantConfig, PlantState,
                              actuator_update, kinetic_energy, measure, plant_step)
from src.models.reference_model import (PedalMap, ReferenceModel, ReferenceState, front_steer_angle,
                                        pedals_to_wheel_forces)
from src.models.tire import wheel_load_cases

IDEAL = PlantConfig(actuator=ActuatorConfig(tau_s=0.0, rate_limit=1e6))


def test_at_rest_stays_at_rest(params):
    state = PlantState()
    for _ in range(100):
        state = plant_step(state, 0.0, 0.0, (0.0,) * 4, 0.001, params)
    assert state == PlantState()


def test_actuator_lag_and_rate_limit():
    actuator = ActuatorConfig(tau_s=0.02, rate_limit=deg2rad(500.0))
    first = actuator_update(0.0, 0.01, 1.0, actuator, 0.001)
    assert first == pytest.approx(0.01 * (1.0 - math.exp(-0.05)))
    big = actuator_update(0.0, 1.0, 1.0, actuator, 0.001)
    assert big == pytest.approx(deg2rad(500.0) * 0.001)
    assert actuator_update(0.0, 2.0, 0.3, ActuatorConfig(tau_s=0.0, rate_limit=1e6), 0.001) == 0.3
    assert actuator_update(0.1, 0.2, 1.0, ActuatorConfig(tau_s=0.0, rate_limit=1e6), 0.001) == 0.2
    with pytest.raises(DomainError):
        ActuatorConfig(tau_s=-1.0)


def test_actuator_never_exceeds_its_slew_rate(params):
    config = PlantConfig()
    state = PlantState(ux=10.0)
    max_step = config.actuator.rate_limit * 0.001
    for k in range(300):
        command = 0.3 if (k // 50) % 2 == 0 else -0.3
        new = plant_step(state, command, -command, (0.0,) * 4, 0.001, params, config)
        assert abs(new.delta_f - state.delta_f) <= max_step + 1e-15
        assert abs(new.delta_r - state.delta_r) <= max_step + 1e-15
        assert abs(new.delta_f) <= params.delta_f_max
        state = new


def test_equal_axle_steering_crabs(params):
    state = PlantState(ux=10.0)
    delta = deg2rad(2.0)
    for _ in range(3000):
        state = plant_step(state, delta, delta, (0.0,) * 4, 0.001, params, IDEAL)
    assert state.uy > 0.0
    assert abs(state.r) < 0.05 * state.uy
    assert state.uy / state.ux == pytest.approx(math.tan(delta), rel=0.1)


def test_coasting_never_gains_energy(params):
    state = PlantState(ux=15.0)
    energy = kinetic_energy(state, params)
    for k in range(3000):
        delta = deg2rad(4.0) * math.sin(2.0 * math.pi * 0.5 * k * 0.001)
        state = plant_step(state, delta, -0.5 * delta, (0.0,) * 4, 0.001, params, IDEAL)
        new_energy = kinetic_energy(state, params)
        assert new_energy <= energy * (1.0 + 1e-6)
        energy = new_energy
    assert state.ux < 15.0


def test_braking_slows_down_and_stops_at_zero(params):
    forces = pedals_to_wheel_forces(DriverInputs(brake=1.0), PedalMap())
    state = PlantState(ux=2.0)
    for _ in range(3000):
        state = plant_step(state, 0.0, 0.0, forces, 0.001, params)
    assert state.ux == 0.0


def test_friction_circle_holds_at_every_wheel(params):
    loads = wheel_load_cases(params)
    state = PlantState(ux=20.0)
    forces = pedals_to_wheel_forces(DriverInputs(throttle=1.0), PedalMap())
    for _ in range(500):
        state = plant_step(state, params.delta_f_max, -params.delta_r_max, forces, 0.001, params)
        for fx, fy, load in zip(state.wheel_fx, state.wheel_fy, loads):
            assert math.hypot(fx, fy) <= load.peak_force * (1.0 + 1e-12)


def test_rear_misalignment_biases_the_rear_angle(params):
    config = PlantConfig(actuator=IDEAL.actuator, rear_misalignment=deg2rad(0.3))
    state = PlantState(ux=10.0)
    for _ in range(500):
        state = plant_step(state, 0.0, 0.0, (0.0,) * 4, 0.001, params, config)
    # actuator position stays at the command, the wheel does not
    assert state.delta_r == 0.0
    assert state.r != 0.0


def test_noiseless_measurement_is_exact():
    state = PlantState(ux=10.0, uy=0.1, r=0.2, ay=1.0, rdot=0.3)
    meas = measure(state)
    assert (meas.ux, meas.uy, meas.r, meas.ay, meas.rdot) == (10.0, 0.1, 0.2, 1.0, 0.3)


def test_noise_statistics_and_seed(params):
    noise = MeasurementNoise(r=0.01)
    plant = Plant(params, PlantConfig(noise=noise, seed=3), PlantState(ux=10.0, r=0.2))
    samples = np.array([plant.measure().r for _ in range(10000)])
    assert abs(samples.mean() - 0.2) < 3.0 * 0.01 / math.sqrt(10000)
    assert samples.std() == pytest.approx(0.01, rel=0.05)
    again = Plant(params, PlantConfig(noise=noise, seed=3), PlantState(ux=10.0, r=0.2))
    assert again.measure().r == samples[0]


def test_noise_without_generator_is_rejected():
    with pytest.raises(DomainError):
        measure(PlantState(ux=1.0), MeasurementNoise(ux=0.1))


def _sine_inputs(k, dt):
    t = k * dt
    delta_hw = deg2rad(60.0) * math.sin(2.0 * math.pi * 0.4 * t)
    throttle = 0.3 if t < 1.0 else 0.0
    brake = 0.2 if 2.0 < t < 4.0 else 0.0
    return DriverInputs(delta_hw=delta_hw, throttle=throttle, brake=brake)


@pytest.mark.parametrize("steps", [3000, pytest.param(30000, marks=pytest.mark.slow)])
def test_unscaled_reference_matches_plant(params, steps):
    dt = 0.001
    reference = ReferenceModel(params, f=1.0, dt=dt, initial=ReferenceState(ux=12.0))
    plant = Plant(params, IDEAL, PlantState(ux=12.0))
    pedals = PedalMap()
    for k in range(steps):
        inputs = _sine_inputs(k, dt)
        ref = reference.step(inputs, plant.measure().ux)
        state = plant.step(front_steer_angle(inputs.delta_hw, params), 0.0,
                           pedals_to_wheel_forces(inputs, pedals), dt)
        assert abs(ref.r - state.r) < 1e-6
        assert abs(ref.uy - state.uy) < 1e-6
    assert math.hypot(ref.E - state.E, ref.N - state.N) < 1e-3
    assert ref.psi == pytest.approx(state.psi, abs=1e-6)
