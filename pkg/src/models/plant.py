# src/models/plant.py
"""
真实试验车的桌面替身

与参考模型使用同一双轨底盘, 以未缩放的车速行驶, 后轮可转向, 执行器带宽有限,
可选后轮转向偏差和测量噪声。

每个步长分两步: 先冻结 ux 做侧向/横摆/位姿的 RK4 积分 (与参考模型相同),
再由车身系纵向力推进 ux。
"""
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError, IntegrationError
from src.core.vehicle import Measurements, VehicleParams, deg2rad
from src.models.chassis import SPEED_FLOOR, Quad, integrate_lateral, tire_forces
from src.models.reference_model import longitudinal_slips, single_track_front_slip
from src.models.tire import TireLoadCase, wheel_load_cases
from src.utils.sim_utils import log


@dataclass(frozen=True)
class ActuatorConfig:
    """车轮处的一阶滞后加速率限制, ``tau_s = 0`` 时精确跟随指令"""
    tau_s: float = 0.02
    rate_limit: float = deg2rad(500.0)

    def __post_init__(self):
        if self.tau_s < 0.0 or not self.rate_limit > 0.0:
            raise DomainError(f"invalid actuator config: {self}")


@dataclass(frozen=True)
class MeasurementNoise:
    """零均值加性高斯噪声的标准差"""
    ux: float = 0.0
    uy: float = 0.0
    r: float = 0.0
    ay: float = 0.0
    rdot: float = 0.0

    @property
    def enabled(self) -> bool:
        return any(s > 0.0 for s in (self.ux, self.uy, self.r, self.ay, self.rdot))


@dataclass(frozen=True)
class PlantConfig:
    actuator: ActuatorConfig = field(default_factory=ActuatorConfig)
    noise: MeasurementNoise = field(default_factory=MeasurementNoise)
    rear_misalignment: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class PlantState:
    ux: float = 0.0
    uy: float = 0.0
    r: float = 0.0
    psi: float = 0.0
    E: float = 0.0
    N: float = 0.0
    delta_f: float = 0.0
    delta_r: float = 0.0
    ay: float = 0.0
    rdot: float = 0.0
    ux_dot: float = 0.0
    alpha_f: float = 0.0
    wheel_fx: Quad = (0.0, 0.0, 0.0, 0.0)
    wheel_fy: Quad = (0.0, 0.0, 0.0, 0.0)


def actuator_update(position: float, command: float, limit: float,
                    actuator: ActuatorConfig, dt: float) -> float:
    """``dt`` 内的精确一阶响应, 再做速率限制和行程限幅"""
    if actuator.tau_s > 0.0:
        target = position + (command - position) * (1.0 - math.exp(-dt / actuator.tau_s))
    else:
        target = command
    max_move = actuator.rate_limit * dt
    target = max(position - max_move, min(position + max_move, target))
    return max(-limit, min(limit, target))


def kinetic_energy(state: PlantState, params: VehicleParams) -> float:
    return 0.5 * params.m * (state.ux ** 2 + state.uy ** 2) + 0.5 * params.Iz * state.r ** 2


def plant_step(state: PlantState, delta_f_cmd: float, delta_r_cmd: float, pedal_forces: Quad, dt: float,
               params: VehicleParams, config: Optional[PlantConfig] = None,
               loads: Optional[Tuple[TireLoadCase, ...]] = None) -> PlantState:
    """
    被控车辆前进一个步长

    Args:
        state: 当前状态
        delta_f_cmd, delta_r_cmd: 前后轮转角指令 [rad]
        pedal_forces: 四个车轮的纵向力 (fl, fr, rl, rr) [N]
        dt: 步长 [s]
        params: 车辆参数
        config: 执行器, 偏差与噪声设置
        loads: 预先计算的车轮轮胎参数

    Raises:
        DomainError: dt 不为正
        IntegrationError: 积分出现非有限值
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    config = config or PlantConfig()
    loads = loads or wheel_load_cases(params)
    delta_f = actuator_update(state.delta_f, delta_f_cmd, params.delta_f_max, config.actuator, dt)
    delta_r = actuator_update(state.delta_r, delta_r_cmd, params.delta_r_max, config.actuator, dt)
    rear = delta_r + config.rear_misalignment
    deltas = (delta_f, delta_f, rear, rear)
    sigma_x = longitudinal_slips(pedal_forces, loads)

    ux = state.ux
    active = ux >= SPEED_FLOOR
    lateral = (state.r, state.uy, state.psi, state.E, state.N)
    (r, uy, psi, E, N), derivative, forces = integrate_lateral(
        lateral, ux, deltas, sigma_x, loads, params, dt)

    if active:
        start = tire_forces(ux, state.uy, state.r, deltas, sigma_x, loads, params)
        fx_body = 0.5 * (start.Fx + forces.Fx)
        coupling = 0.5 * (state.r * state.uy + r * uy)
    else:
        fx_body = float(sum(
            max(-0.98 * load.peak_force, min(0.98 * load.peak_force, fx))
            for fx, load in zip(pedal_forces, loads)))
        coupling = 0.0
    ux_dot = fx_body / params.m + coupling
    ux_new = max(0.0, ux + dt * ux_dot)
    if not math.isfinite(ux_new):
        raise IntegrationError(f"non-finite plant speed (ux={ux}, Fx={fx_body})")

    r_dot, uy_dot = derivative[0], derivative[1]
    return PlantState(
        ux=ux_new, uy=uy, r=r, psi=psi, E=E, N=N,
        delta_f=delta_f, delta_r=delta_r,
        ay=uy_dot + r * ux, rdot=r_dot, ux_dot=(ux_new - ux) / dt,
        alpha_f=single_track_front_slip(ux, uy, r, delta_f, params),
        wheel_fx=forces.wheel_fx, wheel_fy=forces.wheel_fy,
    )


def measure(state: PlantState, noise: Optional[MeasurementNoise] = None,
            rng: Optional[np.random.Generator] = None) -> Measurements:
    """被控车辆的惯导读数, 未配置噪声时为精确值"""
    values = [state.ux, state.uy, state.r, state.ay, state.rdot]
    if noise is not None and noise.enabled:
        if rng is None:
            raise DomainError("measurement noise requires a random generator")
        sigmas = np.array([noise.ux, noise.uy, noise.r, noise.ay, noise.rdot])
        values = list(np.asarray(values) + sigmas * rng.standard_normal(5))
        values[0] = max(0.0, values[0])
    ux, uy, r, ay, rdot = (float(v) for v in values)
    return Measurements(ux=ux, uy=uy, r=r, ay=ay, rdot=rdot)


class Plant:
    """持有 PlantState 和带种子噪声发生器的步进器"""

    def __init__(self, params: VehicleParams, config: Optional[PlantConfig] = None,
                 initial: Optional[PlantState] = None):
        self.params = params
        self.config = config or PlantConfig()
        self._loads = wheel_load_cases(params)
        self._rng = np.random.default_rng(self.config.seed)
        self._state = initial or PlantState()
        if self.config.rear_misalignment:
            log.info(f"被控车辆: 后轮转向偏差 {self.config.rear_misalignment:.5f} rad")
        if self.config.noise.enabled:
            log.info(f"被控车辆: 测量噪声 {self.config.noise}")

    @property
    def state(self) -> PlantState:
        return self._state

    def step(self, delta_f_cmd: float, delta_r_cmd: float, pedal_forces: Sequence[float], dt: float) -> PlantState:
        self._state = plant_step(self._state, delta_f_cmd, delta_r_cmd, tuple(pedal_forces), dt,
                                 self.params, self.config, self._loads)
        return self._state

    def measure(self) -> Measurements:
        return measure(self._state, self.config.noise, self._rng)
