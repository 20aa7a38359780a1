# src/control/tracking_controller.py
"""
前后轮转向指令, 使被控车辆的横摆角速度和侧向加速度跟随参考车辆

每个步长: 积分期望侧向速度, 计算误差, 将参考侧向力和横摆力矩按 PI 反馈分配为前后轴力,
再经集总刷子轮胎模型的逆求出车轮转角。前轮转角需求超出行程时只由后轴跟踪横摆角速度,
两个积分器保持不变。
"""
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from src.control.gains import GainSet
from src.core.errors import ConvergenceError, DomainError
from src.core.vehicle import Measurements, VehicleParams, deg2rad
from src.models.chassis import SPEED_FLOOR
from src.models.reference_model import ReferenceState
from src.models.tire import TireLoadCase, axle_load_cases, invert_lateral, lateral_force
from src.utils.sim_utils import log

BRACKET_MARGIN = 0.05
BRACKET_EDGE = 0.5 * math.pi - 1e-6
BRACKET_MAX_ITER = 100


@dataclass(frozen=True)
class ControllerConfig:
    rate_limit: float = deg2rad(500.0)
    tol: float = 1e-8
    max_iter: int = 10
    max_fallback_ticks: int = 50

    def __post_init__(self):
        if not self.rate_limit > 0.0 or not self.tol > 0.0 or self.max_iter < 1 or self.max_fallback_ticks < 0:
            raise DomainError(f"invalid controller config: {self}")


@dataclass(frozen=True)
class ControllerState:
    u_ydes: float = 0.0
    int_er: float = 0.0
    int_euy: float = 0.0
    saturated: bool = False
    delta_f: float = 0.0
    delta_r: float = 0.0
    # last integrands, for trapezoidal accumulation; None before the first tick
    uy_rate: Optional[float] = None
    e_r: Optional[float] = None
    e_uy: Optional[float] = None
    F1y: float = 0.0
    F2y: float = 0.0
    fallback_ticks: int = 0

    @classmethod
    def engage(cls, meas: Measurements, delta_f: float = 0.0, delta_r: float = 0.0) -> "ControllerState":
        """以测量的侧向速度作为期望侧向速度初值的新状态"""
        return cls(u_ydes=meas.uy, delta_f=delta_f, delta_r=delta_r)


@dataclass(frozen=True)
class ErrorStates:
    e_r: float
    e_uy: float
    int_er: float
    int_euy: float


@dataclass(frozen=True)
class SteeringSolution:
    delta_f: float
    delta_r: float
    demand_f: float
    saturated: bool
    converged: bool


def _trapezoid(previous: Optional[float], current: float, dt: float) -> float:
    if previous is None:
        previous = current
    return 0.5 * (previous + current) * dt


def desired_uy_rate(ref: ReferenceState, meas: Measurements) -> float:
    return ref.uy_dot + ref.r * ref.ux - meas.r * meas.ux


def desired_uy_update(state: ControllerState, ref: ReferenceState, meas: Measurements,
                      dt: float) -> ControllerState:
    """
    用梯形法累加期望侧向速度

    Args:
        state: 当前控制器状态, uy_rate 保存上一步的被积函数
        ref: 本步的参考车辆状态
        meas: 本步的测量
        dt: 步长 [s]

    Raises:
        DomainError: dt 不为正
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    rate = desired_uy_rate(ref, meas)
    return replace(state, u_ydes=state.u_ydes + _trapezoid(state.uy_rate, rate, dt), uy_rate=rate)


def axle_forces(Fy_ref: float, Mz_ref: float, errors: ErrorStates, gains: GainSet,
                params: VehicleParams) -> Tuple[float, float]:
    """车身系前后轴侧向力, 前馈分配加 PI 反馈"""
    L = params.L
    F1y = (params.b * Fy_ref / L + Mz_ref / L
           + gains.K_1r * errors.e_r + gains.K_1rI * errors.int_er
           + gains.K_1uy * errors.e_uy + gains.K_1uyI * errors.int_euy)
    F2y = (params.a * Fy_ref / L - Mz_ref / L
           + gains.K_2r * errors.e_r + gains.K_2rI * errors.int_er
           + gains.K_2uy * errors.e_uy + gains.K_2uyI * errors.int_euy)
    return F1y, F2y


def _axle_geometry(meas: Measurements, arm: float) -> float:
    """轴处速度方向角 atan((uy + arm*r)/ux)"""
    return math.atan((meas.uy + arm * meas.r) / meas.ux)


def _angle_map(delta: float, F_body: float, Fx: float, load: TireLoadCase, geometry: float) -> float:
    tire_force = (F_body - Fx * math.sin(delta)) / math.cos(delta)
    return -invert_lateral(tire_force, load) + geometry


def _bracketed_angle(F_body: float, Fx: float, load: TireLoadCase, geometry: float,
                     config: ControllerConfig) -> Optional[float]:
    """
    用区间法求解 delta = g(delta), 用于不动点迭代在轮胎接近饱和时振荡不收敛的情况。

    逆轮胎模型输出的侧偏角不超过 atan(sigma_sl), 因此区间
    geometry +/- (atan(sigma_sl) + BRACKET_MARGIN) 两端的残差必然异号。

    Args:
        F_body: 期望的车身系轴侧向力 [N]。
        Fx: 轴纵向力 [N]。
        load: 集总轴轮胎参数。
        geometry: 轴处速度方向角 [rad]。
        config: 控制器配置, 使用其中的 tol。

    Returns:
        收敛的转角 [rad]; 区间无效或求解失败时返回 None。
    """
    def residual(delta: float) -> float:
        return delta - _angle_map(delta, F_body, Fx, load, geometry)

    reach = math.atan(load.sigma_sl) + BRACKET_MARGIN
    lo = max(geometry - reach, -BRACKET_EDGE)
    hi = min(geometry + reach, BRACKET_EDGE)
    if residual(lo) * residual(hi) > 0.0:
        return None
    try:
        return brentq(residual, lo, hi, xtol=config.tol, maxiter=BRACKET_MAX_ITER)
    except (RuntimeError, ValueError):
        return None


def _axle_angle(F_body: float, Fx: float, load: TireLoadCase, geometry: float, seed: float,
                config: ControllerConfig) -> Tuple[float, bool]:
    delta = seed
    for _ in range(config.max_iter):
        new = _angle_map(delta, F_body, Fx, load, geometry)
        if abs(new - delta) < config.tol:
            return new, True
        delta = new
    bracketed = _bracketed_angle(F_body, Fx, load, geometry, config)
    if bracketed is not None:
        return bracketed, True
    # small-angle transform about the seed
    return -invert_lateral(F_body - Fx * seed, load) + geometry, False


def forces_to_steering(F1y: float, F2y: float, Fxf: float, Fxr: float, meas: Measurements,
                       params: VehicleParams, previous: Tuple[float, float] = (0.0, 0.0),
                       config: Optional[ControllerConfig] = None) -> SteeringSolution:
    """
    将车身系轴力转换为车轮转角

    Args:
        F1y, F2y: 期望的前后轴车身系侧向力 [N]
        Fxf, Fxr: 前后轴纵向力 [N]
        meas: 被控车辆测量, ux 不得低于 SPEED_FLOOR
        params: 车辆参数
        previous: 上一步的 (delta_f, delta_r), 作为迭代初值
        config: 迭代容差与次数

    Raises:
        DomainError: 车速过低无法求逆
    """
    config = config or ControllerConfig()
    if meas.ux < SPEED_FLOOR:
        raise DomainError(f"force-to-steering conversion needs ux >= {SPEED_FLOOR}, got {meas.ux}")
    front, rear = axle_load_cases(params)
    demand_f, ok_f = _axle_angle(F1y, Fxf, front, _axle_geometry(meas, params.a), previous[0], config)
    demand_r, ok_r = _axle_angle(F2y, Fxr, rear, _axle_geometry(meas, -params.b), previous[1], config)
    if not (ok_f and ok_r):
        log.warning(f"轴力转转角迭代未收敛 (F1y={F1y:.1f}, F2y={F2y:.1f}), 改用小角度变换")
    saturated = abs(demand_f) > params.delta_f_max
    delta_f = max(-params.delta_f_max, min(params.delta_f_max, demand_f))
    delta_r = max(-params.delta_r_max, min(params.delta_r_max, demand_r))
    return SteeringSolution(delta_f, delta_r, demand_f, saturated, ok_f and ok_r)


def estimated_front_force(meas: Measurements, delta_f: float, Fxf: float, params: VehicleParams) -> float:
    """由测量状态推算的车身系前轴力"""
    front, _ = axle_load_cases(params)
    alpha_f = _axle_geometry(meas, params.a) - delta_f
    Fyf = lateral_force(alpha_f, front)
    return Fyf * math.cos(delta_f) + Fxf * math.sin(delta_f)


def saturation_rear_command(meas: Measurements, Mz_ref: float, e_r: float, delta_f: float,
                            gains: GainSet, params: VehicleParams, Fxf: float = 0.0, Fxr: float = 0.0,
                            seed_r: float = 0.0, config: Optional[ControllerConfig] = None
                            ) -> Tuple[float, float, bool]:
    """
    前轮保持在 ``delta_f`` 时, 只由后轮跟踪横摆角速度

    Args:
        meas: 被控车辆测量
        Mz_ref: 参考横摆力矩 [N·m]
        e_r: 横摆角速度误差 [rad/s]
        delta_f: 保持的前轮转角 [rad]
        gains: 增益, 使用其中的 K_rsat
        params: 车辆参数
        seed_r: 后轮转角迭代初值

    Returns:
        (delta_r, F2y, converged)
    """
    config = config or ControllerConfig()
    F1y = estimated_front_force(meas, delta_f, Fxf, params)
    F2y = (-Mz_ref + params.a * F1y + gains.K_rsat * e_r) / params.b
    _, rear = axle_load_cases(params)
    delta_r, ok = _axle_angle(F2y, Fxr, rear, _axle_geometry(meas, -params.b), seed_r, config)
    if not ok:
        log.warning(f"后轮饱和控制律迭代未收敛 (F2y={F2y:.1f})")
    return max(-params.delta_r_max, min(params.delta_r_max, delta_r)), F2y, ok


def seat_acceleration(ay: float, r: float, rdot: float, dx: float, dy: float) -> float:
    """距质心 (dx, dy) 处一点的侧向加速度"""
    return ay + rdot * dx - r * r * dy


def _rate_limit(previous: float, target: float, max_step: float) -> float:
    return max(previous - max_step, min(previous + max_step, target))


def control_step(ref: ReferenceState, meas: Measurements, state: ControllerState, gains: GainSet,
                 params: VehicleParams, dt: float, axle_fx: Tuple[float, float] = (0.0, 0.0),
                 config: Optional[ControllerConfig] = None) -> Tuple[float, float, ControllerState]:
    """控制器单步, 返回 (delta_f, delta_r, 新状态)"""
    config = config or ControllerConfig()
    state = desired_uy_update(state, ref, meas, dt)
    e_r = ref.r - meas.r
    e_uy = state.u_ydes - meas.uy

    if meas.ux < SPEED_FLOOR:
        # nothing to invert at walking pace: follow the reference front angle
        max_step = config.rate_limit * dt
        delta_f = _rate_limit(state.delta_f, ref.delta_f, max_step)
        delta_r = _rate_limit(state.delta_r, 0.0, max_step)
        return delta_f, delta_r, replace(state, delta_f=delta_f, delta_r=delta_r, e_r=e_r, e_uy=e_uy,
                                         saturated=False, fallback_ticks=0)

    int_er = state.int_er + _trapezoid(state.e_r, e_r, dt)
    int_euy = state.int_euy + _trapezoid(state.e_uy, e_uy, dt)
    errors = ErrorStates(e_r, e_uy, int_er, int_euy)
    F1y, F2y = axle_forces(ref.Fy, ref.Mz, errors, gains, params)
    Fxf, Fxr = axle_fx
    solution = forces_to_steering(F1y, F2y, Fxf, Fxr, meas, params,
                                  previous=(state.delta_f, state.delta_r), config=config)
    converged = solution.converged
    delta_f, delta_r = solution.delta_f, solution.delta_r
    if solution.saturated:
        # front at its limit; rear tracks yaw rate, integrators frozen
        delta_r, F2y, ok_r = saturation_rear_command(meas, ref.Mz, e_r, delta_f, gains, params,
                                                     Fxf, Fxr, state.delta_r, config)
        converged = converged and ok_r
        int_er, int_euy = state.int_er, state.int_euy

    fallback_ticks = 0 if converged else state.fallback_ticks + 1
    if fallback_ticks > config.max_fallback_ticks:
        raise ConvergenceError(f"force-to-steering fallback persisted for {fallback_ticks} consecutive ticks")

    max_step = config.rate_limit * dt
    delta_f = _rate_limit(state.delta_f, delta_f, max_step)
    delta_r = _rate_limit(state.delta_r, delta_r, max_step)
    if not (np.isfinite(delta_f) and np.isfinite(delta_r)):
        raise DomainError(f"non-finite steering command ({delta_f}, {delta_r})")
    new_state = replace(state, int_er=int_er, int_euy=int_euy, saturated=solution.saturated,
                        delta_f=delta_f, delta_r=delta_r, e_r=e_r, e_uy=e_uy,
                        F1y=F1y, F2y=F2y, fallback_ticks=fallback_ticks)
    return delta_f, delta_r, new_state


def simulate_saturated_yaw_error(e_r0: float, K_rsat: float, Iz: float, duration: float = 1.0,
                                 dt: float = 0.001) -> Tuple[np.ndarray, np.ndarray]:
    """后轮单独控制时横摆误差 d(e_r)/dt = K_rsat*e_r/Iz 的 RK4 解"""
    steps = int(round(duration / dt))
    rate = K_rsat / Iz
    t = np.arange(steps + 1) * dt
    e = np.empty(steps + 1)
    e[0] = e_r0
    for k in range(steps):
        x = e[k]
        k1 = rate * x
        k2 = rate * (x + 0.5 * dt * k1)
        k3 = rate * (x + 0.5 * dt * k2)
        k4 = rate * (x + dt * k3)
        e[k + 1] = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return t, e
