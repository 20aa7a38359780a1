# src/scenario/driver.py
"""
脚本化的合成驾驶员

转向: 对参考车辆前方预瞄点的侧向误差做比例控制, 再经一阶神经肌肉滞后,
方向盘速率限制和转角限幅。踏板: 对参考车速误差做 PI 调节。
"""
import math
from dataclasses import dataclass, replace
from typing import Tuple

from src.core.errors import DomainError
from src.core.vehicle import DriverInputs, deg2rad
from src.models.reference_model import ReferenceState
from src.scenario.maneuver import Maneuver, preview_point


@dataclass(frozen=True)
class DriverModel:
    preview_time: float = 1.0
    steer_gain: float = 0.6
    hw_rate_limit: float = deg2rad(600.0)
    hw_limit: float = deg2rad(360.0)
    lag_tau: float = 0.05
    speed_kp: float = 0.3
    speed_ki: float = 0.05

    def __post_init__(self):
        if not self.preview_time > 0.0:
            raise DomainError("preview time must be positive")
        values = (self.steer_gain, self.hw_rate_limit, self.hw_limit, self.lag_tau, self.speed_kp, self.speed_ki)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("driver gains must be finite")
        if not (self.hw_rate_limit > 0.0 and self.hw_limit > 0.0 and self.lag_tau >= 0.0):
            raise DomainError("hand-wheel limits must be positive and the lag non-negative")


@dataclass(frozen=True)
class DriverState:
    delta_hw: float = 0.0
    rate: float = 0.0
    accel: float = 0.0
    speed_integral: float = 0.0
    command: float = 0.0


def steering_command(ref: ReferenceState, maneuver: Maneuver, model: DriverModel) -> float:
    """驾驶员期望的方向盘转角 (滞后和限幅之前)"""
    distance = max(ref.ux, 0.0) * model.preview_time
    s_ahead, offset_ahead = preview_point(ref.E, ref.N, ref.psi, distance)
    return model.steer_gain * (maneuver.target_offset(s_ahead) - offset_ahead)


def speed_governor(speed_error: float, integral: float, model: DriverModel, dt: float) -> Tuple[float, float, float]:
    """返回 (throttle, brake, 新积分值), 踏板饱和时积分保持"""
    candidate = integral + speed_error * dt
    effort = model.speed_kp * speed_error + model.speed_ki * candidate
    if abs(effort) > 1.0:
        candidate = integral
        effort = model.speed_kp * speed_error + model.speed_ki * candidate
    throttle = min(1.0, max(0.0, effort))
    brake = min(1.0, max(0.0, -effort))
    return throttle, brake, candidate


def driver_step(ref: ReferenceState, maneuver: Maneuver, model: DriverModel, dt: float,
                state: DriverState) -> Tuple[DriverInputs, DriverState]:
    """
    由参考车辆位姿和车速计算下一步的驾驶员输入

    Args:
        ref: 参考车辆状态
        maneuver: 目标路径
        model: 驾驶员参数
        dt: 步长 [s]
        state: 上一步的驾驶员状态

    Returns:
        (驾驶员输入, 新的驾驶员状态)
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    command = max(-model.hw_limit, min(model.hw_limit, steering_command(ref, maneuver, model)))
    if model.lag_tau > 0.0:
        move = (command - state.delta_hw) * (1.0 - math.exp(-dt / model.lag_tau))
    else:
        move = command - state.delta_hw
    max_move = model.hw_rate_limit * dt
    move = max(-max_move, min(max_move, move))
    delta_hw = max(-model.hw_limit, min(model.hw_limit, state.delta_hw + move))
    rate = (delta_hw - state.delta_hw) / dt
    accel = (rate - state.rate) / dt

    throttle, brake, integral = speed_governor(maneuver.target_speed - ref.ux, state.speed_integral, model, dt)
    inputs = DriverInputs(delta_hw=delta_hw, throttle=throttle, brake=brake)
    return inputs, replace(state, delta_hw=delta_hw, rate=rate, accel=accel,
                           speed_integral=integral, command=command)
