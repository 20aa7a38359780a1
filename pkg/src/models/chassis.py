# src/models/chassis.py
"""
参考模型与被控车辆共用的平面双轨底盘

两者在一个步长内保持纵向速度不变, 积分相同的侧向, 横摆与位姿方程,
因此输入相同时轨迹完全一致。
"""
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

from src.core.errors import IntegrationError
from src.core.vehicle import VehicleParams
from src.models.tire import TireLoadCase, coupled_components, lateral_slip_from_alpha, wheel_slip_angles

# below this speed the slip-angle geometry is not used
SPEED_FLOOR = 0.5
FLOOR_DECAY_TAU = 0.2

Quad = Tuple[float, float, float, float]
LateralState = Tuple[float, float, float, float, float]  # r, uy, psi, E, N


@dataclass(frozen=True)
class ChassisForces:
    Mz: float
    Fy: float
    Fx: float
    alphas: Quad
    wheel_fx: Quad
    wheel_fy: Quad


ZERO_FORCES = ChassisForces(0.0, 0.0, 0.0, (0.0,) * 4, (0.0,) * 4, (0.0,) * 4)


def aggregate_moment_force(wheel_fx: Sequence[float], wheel_fy: Sequence[float],
                           deltas: Sequence[float], params: VehicleParams) -> Tuple[float, float]:
    """由轮胎坐标系下的车轮力 (fl, fr, rl, rr) 求总横摆力矩和车身侧向力"""
    Mz, Fy, _ = _aggregate(wheel_fx, wheel_fy, deltas, params)
    return Mz, Fy


def _aggregate(wheel_fx, wheel_fy, deltas, params: VehicleParams) -> Tuple[float, float, float]:
    half_track = params.d / 2.0
    lateral = []
    longitudinal = []
    for fx, fy, delta in zip(wheel_fx, wheel_fy, deltas):
        s, c = math.sin(delta), math.cos(delta)
        lateral.append(fx * s + fy * c)
        longitudinal.append(fx * c - fy * s)
    fl_y, fr_y, rl_y, rr_y = lateral
    fl_x, fr_x, rl_x, rr_x = longitudinal
    Mz = (params.a * (fl_y + fr_y) - params.b * (rl_y + rr_y)
          + half_track * (-fl_x + fr_x - rl_x + rr_x))
    return Mz, fl_y + fr_y + rl_y + rr_y, fl_x + fr_x + rl_x + rr_x


def tire_forces(ux: float, uy: float, r: float, deltas: Sequence[float], sigma_x: Sequence[float],
                loads: Sequence[TireLoadCase], params: VehicleParams) -> ChassisForces:
    alphas = wheel_slip_angles(ux, uy, r, deltas, params)
    wheel_fx = []
    wheel_fy = []
    for alpha, sx, load in zip(alphas, sigma_x, loads):
        sy = lateral_slip_from_alpha(sx, alpha)
        fx, fy = coupled_components(sx, sy, load.C, load.mu, load.Fz)
        wheel_fx.append(fx)
        wheel_fy.append(fy)
    Mz, Fy, Fx = _aggregate(wheel_fx, wheel_fy, deltas, params)
    return ChassisForces(Mz, Fy, Fx, alphas, tuple(wheel_fx), tuple(wheel_fy))


def lateral_derivatives(state: LateralState, ux: float, deltas: Sequence[float], sigma_x: Sequence[float],
                        loads: Sequence[TireLoadCase], params: VehicleParams,
                        active: bool) -> Tuple[LateralState, ChassisForces]:
    """ux 不变时 (r, uy, psi, E, N) 的导数"""
    r, uy, psi, _, _ = state
    sin_psi, cos_psi = math.sin(psi), math.cos(psi)
    if active:
        forces = tire_forces(ux, uy, r, deltas, sigma_x, loads, params)
        r_dot = forces.Mz / params.Iz
        uy_dot = forces.Fy / params.m - r * ux
        E_dot = -ux * sin_psi - uy * cos_psi
        N_dot = ux * cos_psi - uy * sin_psi
    else:
        forces = ZERO_FORCES
        r_dot = -r / FLOOR_DECAY_TAU
        uy_dot = -uy / FLOOR_DECAY_TAU
        E_dot = -ux * sin_psi
        N_dot = ux * cos_psi
    return (r_dot, uy_dot, r, E_dot, N_dot), forces


def rk4_step(deriv: Callable[[LateralState], LateralState], state: LateralState, dt: float) -> LateralState:
    k1 = deriv(state)
    k2 = deriv(tuple(x + 0.5 * dt * k for x, k in zip(state, k1)))
    k3 = deriv(tuple(x + 0.5 * dt * k for x, k in zip(state, k2)))
    k4 = deriv(tuple(x + dt * k for x, k in zip(state, k3)))
    return tuple(x + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                 for x, a, b, c, d in zip(state, k1, k2, k3, k4))


def integrate_lateral(state: LateralState, ux: float, deltas: Sequence[float], sigma_x: Sequence[float],
                      loads: Sequence[TireLoadCase], params: VehicleParams,
                      dt: float) -> Tuple[LateralState, LateralState, ChassisForces]:
    """
    RK4 积分一个步长

    Args:
        state: 当前 (r, uy, psi, E, N)
        ux: 本步保持的纵向速度 [m/s], 低于 SPEED_FLOOR 时不计轮胎力
        deltas: 四个车轮转角 (fl, fr, rl, rr) [rad]
        dt: 步长 [s]

    Returns:
        (新状态, 新状态处的导数, 新状态处的力)

    Raises:
        IntegrationError: 积分结果出现非有限值
    """
    active = ux >= SPEED_FLOOR

    def deriv(x: LateralState) -> LateralState:
        return lateral_derivatives(x, ux, deltas, sigma_x, loads, params, active)[0]

    new_state = rk4_step(deriv, state, dt)
    if not all(math.isfinite(v) for v in new_state):
        raise IntegrationError(f"non-finite chassis state {new_state} (ux={ux}, deltas={tuple(deltas)})")
    derivative, forces = lateral_derivatives(new_state, ux, deltas, sigma_x, loads, params, active)
    return new_state, derivative, forces
