# src/models/haptics.py
"""
力反馈方向盘的转向手感力矩

    tau_hw = tau_damp + tau_inertia + W_f(alpha_f) * (tau_align + tau_jack)

tau_align 由集总前轴刷子轮胎在驾驶员应感受到的车辆的侧偏角处求得
(仿真时为参考车辆, 手动驾驶时为被控车辆的测量值)。
"""
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.core.errors import DomainError
from src.core.vehicle import DriverInputs, VehicleParams, deg2rad
from src.models.reference_model import ReferenceModel, ReferenceState
from src.models.tire import axle_load_cases, lateral_force


@dataclass(frozen=True)
class HapticParams:
    b_hw: float = 1.0
    J_hw: float = 0.03
    w_floor: float = 0.2
    w_sigma: float = deg2rad(3.0)
    k_align: float = 0.0015
    k_jack: float = 2.0
    # intrinsic inertia of the hand wheel and column, used for hands-off runs
    J_column: float = 0.02

    def __post_init__(self):
        for name in ("b_hw", "J_hw", "k_align", "k_jack", "J_column"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be non-negative")
        if not self.w_sigma > 0.0:
            raise DomainError("w_sigma must be positive")
        if not 0.0 < self.w_floor <= 1.0:
            raise DomainError("w_floor must be in (0, 1]")


@dataclass(frozen=True)
class TorqueBreakdown:
    damping: float
    inertia: float
    weight: float
    aligning: float
    jacking: float

    @property
    def total(self) -> float:
        return self.damping + self.inertia + self.weight * (self.aligning + self.jacking)


def weighting(alpha_f: float, params: HapticParams) -> float:
    """高斯权重, 零侧偏时为 1, 趋于 ``w_floor``"""
    return params.w_floor + (1.0 - params.w_floor) * math.exp(-alpha_f ** 2 / (2.0 * params.w_sigma ** 2))


def front_lateral_force(alpha_f: float, vehicle: VehicleParams) -> float:
    """集总前轴在侧偏角 ``alpha_f`` 下的纯侧向力"""
    front, _ = axle_load_cases(vehicle)
    return lateral_force(alpha_f, front)


def torque_components(alpha_f_ref: float, delta_hw: float, delta_hw_rate: float, delta_hw_accel: float,
                      front_force: float, params: HapticParams) -> TorqueBreakdown:
    return TorqueBreakdown(
        damping=-params.b_hw * delta_hw_rate,
        inertia=-params.J_hw * delta_hw_accel,
        weight=weighting(alpha_f_ref, params),
        aligning=-params.k_align * front_force,
        jacking=-params.k_jack * math.sin(2.0 * delta_hw) / 2.0,
    )


def steering_torque(alpha_f_ref: float, delta_hw: float, delta_hw_rate: float, delta_hw_accel: float,
                    front_force: float, params: HapticParams) -> float:
    """
    方向盘力矩 [N·m]

    Args:
        alpha_f_ref: 驾驶员应感受的前轴侧偏角 [rad]
        delta_hw: 方向盘转角 [rad]
        delta_hw_rate: 方向盘角速度 [rad/s]
        delta_hw_accel: 方向盘角加速度 [rad/s^2]
        front_force: 前轴侧向力 [N]
        params: 手感参数
    """
    return torque_components(alpha_f_ref, delta_hw, delta_hw_rate, delta_hw_accel, front_force, params).total


def torque_bound(delta_hw_rate: float, delta_hw_accel: float, vehicle: VehicleParams,
                 params: HapticParams) -> float:
    return (params.b_hw * abs(delta_hw_rate) + params.J_hw * abs(delta_hw_accel)
            + params.k_align * vehicle.mu * vehicle.Fz_f + params.k_jack / 2.0)


@dataclass
class ReleaseTrace:
    t: np.ndarray
    delta_hw: np.ndarray
    torque: np.ndarray

    def overshoot(self) -> float:
        """越过零点的最大幅度, 以初始转角的比例表示"""
        start = self.delta_hw[0]
        if start == 0.0:
            return 0.0
        return max(0.0, float(np.max(-self.delta_hw * math.copysign(1.0, start)))) / abs(start)


def release_response(delta_hw0: float, ux_ref: float, vehicle: VehicleParams,
                     params: Optional[HapticParams] = None, duration: float = 3.0,
                     dt: float = 0.001) -> ReleaseTrace:
    """
    参考车辆以 ``ux_ref`` 行驶时, 在 ``delta_hw0`` 处松开方向盘的回正响应

    转向柱自身惯量为 J_column, 仿真惯量项移到左侧,
    方向盘满足 (J_column + J_hw)·accel = damping + W·(aligning + jacking)。

    Args:
        delta_hw0: 松手时的方向盘转角 [rad]
        ux_ref: 参考车速 [m/s]
        vehicle: 车辆参数
        params: 手感参数, 为 None 时取默认值
        duration: 仿真时长 [s]
        dt: 步长 [s]

    Raises:
        DomainError: 方向盘总惯量不为正
    """
    params = params or HapticParams()
    inertia = params.J_column + params.J_hw
    if not inertia > 0.0:
        raise DomainError("hands-off response needs a positive hand-wheel inertia")
    model = ReferenceModel(vehicle, f=1.0, dt=dt, initial=ReferenceState(ux=ux_ref))
    steps = int(round(duration / dt))
    angle, rate = delta_hw0, 0.0
    times: List[float] = [0.0]
    angles: List[float] = [angle]
    torques: List[float] = [0.0]
    for k in range(1, steps + 1):
        ref = model.step(DriverInputs(delta_hw=angle), ux_ref)
        parts = torque_components(ref.alpha_f, angle, rate, 0.0,
                                  front_lateral_force(ref.alpha_f, vehicle), params)
        accel = parts.total / inertia
        rate += dt * accel
        angle += dt * rate
        times.append(k * dt)
        angles.append(angle)
        torques.append(parts.total - params.J_hw * accel)
    return ReleaseTrace(np.array(times), np.array(angles), np.array(torques))
