import math

import numpy as np
import pytest

from src.core.errors import DomainError
from src.core.vehicle import deg2rad
from src.models.haptics import (HapticParams, front_lateral_force, release_response, steering_torque,
                                torque_bound, torque_components, weighting)


@pytest.fixture
def haptics():
    return HapticParams()


def test_weighting_shape(haptics):
    assert weighting(0.0, haptics) == 1.0
    assert weighting(haptics.w_sigma, haptics) == pytest.approx(0.2 + 0.8 * math.exp(-0.5))
    assert weighting(1.0, haptics) == pytest.approx(0.2, abs=1e-6)
    values = [weighting(a, haptics) for a in np.linspace(0.0, 0.3, 50)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert weighting(-0.02, haptics) == weighting(0.02, haptics)


def test_zero_inputs_give_zero_torque(haptics):
    assert steering_torque(0.0, 0.0, 0.0, 0.0, 0.0, haptics) == 0.0


def test_only_jacking_survives_on_a_static_wheel(haptics):
    tau = steering_torque(0.0, deg2rad(30.0), 0.0, 0.0, 0.0, haptics)
    assert tau == pytest.approx(-haptics.k_jack * math.sin(deg2rad(60.0)) / 2.0)


def test_torque_is_odd(params, haptics):
    alpha, angle, rate, accel = 0.03, 0.4, -1.2, 5.0
    tau = steering_torque(alpha, angle, rate, accel, front_lateral_force(alpha, params), haptics)
    mirrored = steering_torque(-alpha, -angle, -rate, -accel, front_lateral_force(-alpha, params), haptics)
    assert mirrored == pytest.approx(-tau)


def test_aligning_torque_centres_the_wheel(params, haptics):
    # a left turn loads the front tire to the left (negative slip); aligning torque pushes back right
    parts = torque_components(-0.02, 0.0, 0.0, 0.0, front_lateral_force(-0.02, params), haptics)
    assert parts.aligning < 0.0
    assert parts.damping == 0.0 and parts.jacking == 0.0


def test_torque_bound_holds(params, haptics):
    rng = np.random.default_rng(1)
    for alpha, angle, rate, accel in rng.uniform(-1.0, 1.0, (500, 4)) * [0.5, 6.0, 10.0, 100.0]:
        tau = steering_torque(alpha, angle, rate, accel, front_lateral_force(alpha, params), haptics)
        assert abs(tau) <= torque_bound(rate, accel, params, haptics) + 1e-9


def test_invalid_params():
    with pytest.raises(DomainError):
        HapticParams(w_floor=0.0)
    with pytest.raises(DomainError):
        HapticParams(b_hw=-1.0)
    with pytest.raises(DomainError):
        HapticParams(w_sigma=0.0)


def test_released_wheel_returns_to_centre(params, haptics):
    trace = release_response(deg2rad(30.0), 20.0, params, haptics, duration=4.0)
    assert trace.overshoot() <= 0.2
    assert abs(trace.delta_hw[-1]) < 0.1 * deg2rad(30.0)
    assert trace.t[-1] == pytest.approx(4.0)


def test_released_wheel_needs_inertia(params):
    with pytest.raises(DomainError):
        release_response(0.5, 20.0, params, HapticParams(J_hw=0.0, J_column=0.0))
