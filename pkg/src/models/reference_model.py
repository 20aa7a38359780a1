# src/models/reference_model.py
"""
被仿真的高速车辆

纵向速度为被控车辆测量车速乘以缩放系数 f, 侧向, 横摆与位姿状态在共用的双轨底盘上积分,
前轮由驾驶员经转向传动比转动, 后轮固定不转。
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.core.errors import ConfigError, DomainError
from src.core.vehicle import DriverInputs, VehicleParams
from src.models.chassis import (SPEED_FLOOR, Quad, aggregate_moment_force,
                                integrate_lateral)
from src.models.tire import TireLoadCase, invert_longitudinal, wheel_load_cases
from src.utils.sim_utils import log

__all__ = ["PedalMap", "ReferenceState", "ReferenceModel", "scale_speed", "pedals_to_wheel_forces",
           "aggregate_moment_force", "front_steer_angle", "longitudinal_slips", "step"]


@dataclass(frozen=True)
class PedalMap:
    """踏板到力的线性映射, ``*_front`` 为各通道中前轴所占比例"""
    F_throttle_max: float = 4000.0
    F_brake_max: float = 8000.0
    drive_front: float = 0.0
    brake_front: float = 0.6

    def __post_init__(self):
        if self.F_throttle_max < 0.0 or self.F_brake_max < 0.0:
            raise DomainError("pedal forces must be non-negative")
        for name in ("drive_front", "brake_front"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{name} must be in [0, 1]")


@dataclass(frozen=True)
class ReferenceState:
    r: float = 0.0
    uy: float = 0.0
    psi: float = 0.0
    E: float = 0.0
    N: float = 0.0
    ux: float = 0.0
    ux_dot: float = 0.0
    uy_dot: float = 0.0
    rdot: float = 0.0
    ay: float = 0.0
    Mz: float = 0.0
    Fy: float = 0.0
    alpha_f: float = 0.0
    delta_f: float = 0.0
    wheel_fx: Quad = (0.0, 0.0, 0.0, 0.0)
    wheel_fy: Quad = (0.0, 0.0, 0.0, 0.0)
    wheel_alpha: Quad = (0.0, 0.0, 0.0, 0.0)

    @property
    def delta_fl(self) -> float:
        return self.delta_f

    @property
    def delta_fr(self) -> float:
        return self.delta_f

    @property
    def pose(self) -> Tuple[float, float, float]:
        return self.E, self.N, self.psi


def scale_speed(ux: float, f: float) -> float:
    if not f >= 1.0:
        raise ConfigError(f"speed scaling factor must be >= 1, got {f}")
    if ux < 0.0:
        raise DomainError(f"ux must be non-negative, got {ux}")
    return f * ux


def pedals_to_wheel_forces(inputs: DriverInputs, pedal_map: PedalMap) -> Quad:
    """各车轮纵向力 (fl, fr, rl, rr), 同轴左右相等"""
    drive = inputs.throttle * pedal_map.F_throttle_max
    brake = inputs.brake * pedal_map.F_brake_max
    front = drive * pedal_map.drive_front - brake * pedal_map.brake_front
    rear = drive * (1.0 - pedal_map.drive_front) - brake * (1.0 - pedal_map.brake_front)
    return front / 2.0, front / 2.0, rear / 2.0, rear / 2.0


def front_steer_angle(delta_hw: float, params: VehicleParams) -> float:
    """常规转向器的车轮转角 delta_hw/SR, 限制在行程内"""
    limit = params.delta_f_max
    return max(-limit, min(limit, delta_hw / params.SR))


def longitudinal_slips(wheel_forces: Quad, loads) -> Quad:
    return tuple(invert_longitudinal(force, load) for force, load in zip(wheel_forces, loads))


def single_track_front_slip(ux: float, uy: float, r: float, delta_f: float, params: VehicleParams) -> float:
    if ux < SPEED_FLOOR:
        return 0.0
    return math.atan((uy + params.a * r) / ux) - delta_f


def step(state: ReferenceState, inputs: DriverInputs, ux_measured: float, f: float, dt: float,
         params: VehicleParams, pedal_map: Optional[PedalMap] = None,
         loads: Optional[Tuple[TireLoadCase, ...]] = None) -> ReferenceState:
    """
    参考车辆前进一个步长

    Args:
        state: 当前参考状态
        inputs: 驾驶员输入
        ux_measured: 被控车辆测量车速 [m/s]
        f: 车速缩放系数
        dt: 步长 [s]
        params: 车辆参数
        pedal_map: 踏板映射, 为 None 时取默认值
        loads: 预先计算的车轮轮胎参数
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    pedal_map = pedal_map or PedalMap()
    loads = loads or wheel_load_cases(params)
    ux = scale_speed(ux_measured, f)
    delta_f = front_steer_angle(inputs.delta_hw, params)
    deltas = (delta_f, delta_f, 0.0, 0.0)
    sigma_x = longitudinal_slips(pedals_to_wheel_forces(inputs, pedal_map), loads)

    lateral = (state.r, state.uy, state.psi, state.E, state.N)
    (r, uy, psi, E, N), derivative, forces = integrate_lateral(
        lateral, ux, deltas, sigma_x, loads, params, dt)
    r_dot, uy_dot = derivative[0], derivative[1]
    return ReferenceState(
        r=r, uy=uy, psi=psi, E=E, N=N, ux=ux,
        ux_dot=(ux - state.ux) / dt,
        uy_dot=uy_dot, rdot=r_dot, ay=uy_dot + r * ux,
        Mz=forces.Mz, Fy=forces.Fy,
        alpha_f=single_track_front_slip(ux, uy, r, delta_f, params),
        delta_f=delta_f,
        wheel_fx=forces.wheel_fx, wheel_fy=forces.wheel_fy, wheel_alpha=forces.alphas,
    )


class ReferenceModel:
    """持有 ReferenceState 的步进器, 对外给出的快照不可变"""

    def __init__(self, params: VehicleParams, f: float, dt: float,
                 pedal_map: Optional[PedalMap] = None, initial: Optional[ReferenceState] = None):
        if not f >= 1.0:
            raise ConfigError(f"speed scaling factor must be >= 1, got {f}")
        self.params = params
        self.f = f
        self.dt = dt
        self.pedal_map = pedal_map or PedalMap()
        self._loads = wheel_load_cases(params)
        self._state = initial or ReferenceState()
        log.debug(f"参考模型: f={f}, dt={dt}, 踏板映射 {self.pedal_map}")

    @property
    def state(self) -> ReferenceState:
        return self._state

    def reset(self, state: Optional[ReferenceState] = None) -> None:
        self._state = state or ReferenceState()

    def step(self, inputs: DriverInputs, ux_measured: float) -> ReferenceState:
        self._state = step(self._state, inputs, ux_measured, self.f, self.dt,
                           self.params, self.pedal_map, self._loads)
        return self._state
