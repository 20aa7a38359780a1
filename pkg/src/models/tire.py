# src/models/tire.py
"""
纵横向耦合滑移的刷子轮胎模型

符号约定 (仅在此处定义):
    侧偏角 alpha > 0  ->  sigma_y = (sigma_x - 1) tan(alpha) < 0  ->  Fy < 0
即正的侧向力需求对应负的侧偏角。力沿滑移向量 (sigma_x, sigma_y) 方向, 大小为 F(sigma)。

sigma_sl 以下的三次式可写成 F = mu*Fz*(1 - (1 - sigma/sigma_sl)**3), 求逆时按此式解析求解。
"""
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from scipy.optimize import brentq

from src.core.errors import DegenerateSpeedError, DomainError
from src.core.vehicle import VehicleParams

# demands are clamped to this fraction of mu*Fz before inversion
DEMAND_CLAMP = 0.98
SLIP_TOL = 1e-14


@dataclass(frozen=True)
class TireLoadCase:
    C: float
    mu: float
    Fz: float

    def __post_init__(self):
        if not (self.C > 0 and self.mu > 0 and self.Fz > 0):
            raise DomainError(f"tire load case must be positive: C={self.C}, mu={self.mu}, Fz={self.Fz}")

    @property
    def sigma_sl(self) -> float:
        """完全滑动前的峰值滑移量"""
        return 3.0 * self.mu * self.Fz / self.C

    @property
    def peak_force(self) -> float:
        return self.mu * self.Fz


@dataclass(frozen=True)
class SlipState:
    sigma_x: float = 0.0
    sigma_y: float = 0.0
    alpha: Optional[float] = None

    @property
    def sigma(self) -> float:
        return math.hypot(self.sigma_x, self.sigma_y)


def axle_load_cases(params: VehicleParams) -> Tuple[TireLoadCase, TireLoadCase]:
    """集总 (单轨) 前后轴轮胎"""
    return (TireLoadCase(params.Cf, params.mu, params.Fz_f),
            TireLoadCase(params.Cr, params.mu, params.Fz_r))


def wheel_load_cases(params: VehicleParams) -> Tuple[TireLoadCase, TireLoadCase, TireLoadCase, TireLoadCase]:
    """各车轮轮胎 (fl, fr, rl, rr), 刚度和载荷各取轴的一半"""
    front = TireLoadCase(params.Cf / 2.0, params.mu, params.Fz_f / 2.0)
    rear = TireLoadCase(params.Cr / 2.0, params.mu, params.Fz_r / 2.0)
    return front, front, rear, rear


def _force_magnitude(sigma: float, C: float, mu: float, Fz: float) -> float:
    sigma_sl = 3.0 * mu * Fz / C
    if sigma >= sigma_sl:
        return mu * Fz
    return sigma * C - (sigma * C) ** 2 / (3.0 * mu * Fz) + (sigma * C) ** 3 / (27.0 * (mu * Fz) ** 2)


def brush_force_magnitude(sigma: float, load: TireLoadCase) -> float:
    """
    合成滑移 ``sigma`` 对应的力的大小 [N], 在 mu*Fz 处饱和

    Args:
        sigma: 合成滑移量, 必须为有限非负数
        load: 轮胎参数

    Raises:
        DomainError: sigma 为负或非有限值
    """
    if not math.isfinite(sigma) or sigma < 0.0:
        raise DomainError(f"combined slip must be finite and non-negative, got {sigma}")
    return _force_magnitude(sigma, load.C, load.mu, load.Fz)


def brush_force_slope(sigma: float, load: TireLoadCase) -> float:
    """dF/dsigma, 在 sigma_sl 及以上为零"""
    sigma_sl = load.sigma_sl
    if sigma >= sigma_sl:
        return 0.0
    return load.C * (1.0 - sigma / sigma_sl) ** 2


def coupled_components(sigma_x: float, sigma_y: float, C: float, mu: float, Fz: float) -> Tuple[float, float]:
    """:func:`coupled_forces` 的标量核心, 供积分器调用"""
    sigma = math.hypot(sigma_x, sigma_y)
    if sigma == 0.0:
        return 0.0, 0.0
    force = _force_magnitude(sigma, C, mu, Fz)
    return sigma_x / sigma * force, sigma_y / sigma * force


def coupled_forces(slip: SlipState, load: TireLoadCase) -> Tuple[float, float]:
    """轮胎坐标系下的 (Fx, Fy), 零滑移时为 (0, 0)"""
    if not (math.isfinite(slip.sigma_x) and math.isfinite(slip.sigma_y)):
        raise DomainError(f"slip must be finite: {slip}")
    return coupled_components(slip.sigma_x, slip.sigma_y, load.C, load.mu, load.Fz)


def lateral_slip_from_alpha(sigma_x: float, alpha: float) -> float:
    if not abs(alpha) < math.pi / 2:
        raise DomainError(f"|alpha| must be below pi/2, got {alpha}")
    return (sigma_x - 1.0) * math.tan(alpha)


def _clamp_demand(force: float, load: TireLoadCase) -> float:
    if not math.isfinite(force):
        raise DomainError(f"force demand must be finite, got {force}")
    limit = DEMAND_CLAMP * load.peak_force
    return max(-limit, min(limit, force))


def slip_magnitude_for_force(force: float, load: TireLoadCase) -> float:
    """三次段的反函数, 适用于 0 <= force < mu*Fz"""
    ratio = force / load.peak_force
    sigma = load.sigma_sl * (1.0 - (1.0 - ratio) ** (1.0 / 3.0))
    residual = _force_magnitude(sigma, load.C, load.mu, load.Fz) - force
    if abs(residual) > 1e-8:
        # cube root lost precision; bracket on the monotone branch instead
        sigma = brentq(lambda s: _force_magnitude(s, load.C, load.mu, load.Fz) - force,
                       0.0, load.sigma_sl, xtol=SLIP_TOL)
    return sigma


def invert_lateral(Fy_desired: float, load: TireLoadCase) -> float:
    """
    求纯侧向刷子力等于 (限幅后) 需求的侧偏角

    Args:
        Fy_desired: 期望侧向力 [N], 超过 DEMAND_CLAMP*mu*Fz 的部分被截断
        load: 轮胎参数

    Returns:
        侧偏角 [rad], 与需求符号相反
    """
    demand = _clamp_demand(Fy_desired, load)
    if demand == 0.0:
        return 0.0
    sigma = slip_magnitude_for_force(abs(demand), load)
    # sigma_x = 0: sigma_y = -tan(alpha) and Fy has the sign of sigma_y
    return -math.copysign(math.atan(sigma), demand)


def invert_longitudinal(Fx_desired: float, load: TireLoadCase) -> float:
    """纯纵向刷子力等于 (限幅后) 需求的纵向滑移"""
    demand = _clamp_demand(Fx_desired, load)
    if demand == 0.0:
        return 0.0
    return math.copysign(slip_magnitude_for_force(abs(demand), load), demand)


def wheel_slip_angles(ux: float, uy: float, r: float, deltas: Sequence[float],
                      params: VehicleParams) -> Tuple[float, float, float, float]:
    """双轨模型各车轮的侧偏角 (fl, fr, rl, rr)"""
    half_track = params.d / 2.0
    den_left = ux - r * half_track
    den_right = ux + r * half_track
    if den_left <= 0.0 or den_right <= 0.0:
        raise DegenerateSpeedError(
            f"slip-angle denominator not positive (ux={ux:.4f}, r={r:.4f}, d={params.d})")
    num_front = uy + params.a * r
    num_rear = uy - params.b * r
    delta_fl, delta_fr, delta_rl, delta_rr = deltas
    return (math.atan(num_front / den_left) - delta_fl,
            math.atan(num_front / den_right) - delta_fr,
            math.atan(num_rear / den_left) - delta_rl,
            math.atan(num_rear / den_right) - delta_rr)


def lateral_force(alpha: float, load: TireLoadCase) -> float:
    """侧偏角 ``alpha`` 下的纯侧向 (sigma_x = 0) 刷子力"""
    if alpha == 0.0:
        return 0.0
    magnitude = brush_force_magnitude(abs(lateral_slip_from_alpha(0.0, alpha)), load)
    return -math.copysign(magnitude, alpha)
