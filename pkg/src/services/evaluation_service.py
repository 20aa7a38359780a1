# src/services/evaluation_service.py
"""
运行结果评估: 横摆感知阈值, 跟踪统计, 仿真与手动驾驶的对比, 以及前后轮转向规律

这里的函数都只依赖遥测数据。
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError, EvaluationError
from src.core.vehicle import rad2deg
from src.data.telemetry import Telemetry
from src.services.spectrum_service import low_band_ratio

COMPLIANCE_PASS_PCT = 95.0
COMPLIANCE_STATISTIC = ("share of samples with |r_ref - r| at or below the yaw perception threshold "
                        "interpolated at the run's peak |r_ref|; a run complies at >= 95 %")


@dataclass(frozen=True)
class ThresholdTable:
    """横摆角速度感知阈值 (deg/s) 与参考幅值 (deg/s) 的对应表, 中间分段线性, 超出范围取端点值"""
    points: Tuple[Tuple[float, float], ...] = ((12.8, 2.65), (20.6, 3.35))

    def __post_init__(self):
        amps = [p[0] for p in self.points]
        thresholds = [p[1] for p in self.points]
        if any(b <= a for a, b in zip(amps, amps[1:])):
            raise DomainError("threshold amplitudes must be strictly increasing")
        if any(t <= 0.0 for t in thresholds) or any(b < a for a, b in zip(thresholds, thresholds[1:])):
            raise DomainError("thresholds must be positive and nondecreasing")

    def extended(self, extra: Iterable[Sequence[float]]) -> "ThresholdTable":
        merged = dict(self.points)
        merged.update({float(a): float(t) for a, t in extra})
        return ThresholdTable(tuple(sorted(merged.items())))


def yaw_threshold(amplitude: float, table: Optional[ThresholdTable] = None) -> float:
    """
    参考横摆角速度幅值对应的感知阈值

    Args:
        amplitude: 参考幅值 [deg/s], 不得为负
        table: 阈值表, 为 None 时取默认表

    Returns:
        阈值 [deg/s]
    """
    table = table or ThresholdTable()
    if not table.points:
        raise EvaluationError("threshold table is empty")
    if amplitude < 0.0:
        raise DomainError(f"amplitude must be non-negative, got {amplitude}")
    amps, thresholds = zip(*table.points)
    return float(np.interp(amplitude, amps, thresholds))


@dataclass(frozen=True)
class TrackingReport:
    n_samples: int
    peak_r_ref_dps: float
    peak_r_dps: float
    peak_ay_ref: float
    peak_ay: float
    peak_ay_seat: float
    threshold_dps: float
    compliance_pct: float
    rms_e_r_dps: float
    rms_e_ay: float
    low_band_ratio: float
    saturation_fraction: float
    peak_tau_hw: float
    statistic: str = COMPLIANCE_STATISTIC
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def complies(self) -> bool:
        return self.compliance_pct >= COMPLIANCE_PASS_PCT

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    def lines(self) -> List[str]:
        rows = [
            f"samples:               {self.n_samples}",
            f"peak |r_ref|:          {self.peak_r_ref_dps:.2f} deg/s",
            f"peak |r|:              {self.peak_r_dps:.2f} deg/s",
            f"peak |ay_ref|:         {self.peak_ay_ref:.2f} m/s^2",
            f"peak |ay|:             {self.peak_ay:.2f} m/s^2",
            f"peak |ay| at seat:     {self.peak_ay_seat:.2f} m/s^2",
            f"yaw threshold:         {self.threshold_dps:.2f} deg/s",
            f"threshold compliance:  {self.compliance_pct:.1f} % ({'PASS' if self.complies else 'FAIL'})",
            f"RMS e_r:               {self.rms_e_r_dps:.3f} deg/s",
            f"RMS e_ay:              {self.rms_e_ay:.3f} m/s^2",
            f"low-band (<1 Hz) ratio:{self.low_band_ratio:.3f}",
            f"front saturation:      {100.0 * self.saturation_fraction:.1f} % of samples",
            f"peak |tau_hw|:         {self.peak_tau_hw:.2f} N*m",
        ]
        rows.extend(f"{key}: {value:.4g}" for key, value in sorted(self.extras.items()))
        rows.append(f"statistic: {self.statistic}")
        return rows


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def tracking_report(telemetry: Telemetry, table: Optional[ThresholdTable] = None) -> TrackingReport:
    """单次运行的全部跟踪统计"""
    if len(telemetry) == 0:
        raise EvaluationError("telemetry stream is empty")
    r_ref = rad2deg(telemetry["r_ref"])
    r = rad2deg(telemetry["r"])
    peak = float(np.max(np.abs(r_ref)))
    threshold = yaw_threshold(peak, table)
    e_r = np.abs(r_ref - r)
    compliance = 100.0 * float(np.mean(e_r <= threshold))
    ratio = low_band_ratio(telemetry["ay_ref"], telemetry["ay"], telemetry.dt) if len(telemetry) > 1 else float("nan")
    return TrackingReport(
        n_samples=len(telemetry),
        peak_r_ref_dps=peak,
        peak_r_dps=float(np.max(np.abs(r))),
        peak_ay_ref=float(np.max(np.abs(telemetry["ay_ref"]))),
        peak_ay=float(np.max(np.abs(telemetry["ay"]))),
        peak_ay_seat=float(np.max(np.abs(telemetry["ay_seat"]))),
        threshold_dps=threshold,
        compliance_pct=compliance,
        rms_e_r_dps=_rms(r_ref - r),
        rms_e_ay=_rms(telemetry["ay_ref"] - telemetry["ay"]),
        low_band_ratio=ratio,
        saturation_fraction=float(np.mean(telemetry["saturated"] > 0.5)),
        peak_tau_hw=float(np.max(np.abs(telemetry["tau_hw"]))),
    )


COMPARE_CHANNELS = ("r", "ay", "delta_hw", "tau_hw")


@dataclass(frozen=True)
class ChannelDifference:
    rms: float
    max: float


def compare_runs(run_a: Telemetry, run_b: Telemetry, channels: Sequence[str] = COMPARE_CHANNELS,
                 spacing: float = 0.1) -> Dict[str, ChannelDifference]:
    """
    在公共的沿路距离网格上比较两次运行

    Args:
        run_a, run_b: 两次运行的遥测
        channels: 参与比较的通道
        spacing: 网格间距 [m]

    Returns:
        各通道差值的 RMS 和最大值

    Raises:
        EvaluationError: 两次运行在 s 上没有重叠
    """
    s_a, s_b = run_a["s"], run_b["s"]
    lo = max(float(np.min(s_a)), float(np.min(s_b)))
    hi = min(float(np.max(s_a)), float(np.max(s_b)))
    if not hi > lo:
        raise EvaluationError(f"runs do not overlap in s ([{lo:.2f}, {hi:.2f}])")
    grid = np.arange(lo, hi, spacing)
    result: Dict[str, ChannelDifference] = {}
    for name in channels:
        a = _resample(s_a, run_a[name], grid)
        b = _resample(s_b, run_b[name], grid)
        diff = a - b
        result[name] = ChannelDifference(_rms(diff), float(np.max(np.abs(diff))))
    return result


def _resample(s: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    # s is nondecreasing; drop repeated stations so interp sees a strictly increasing abscissa
    keep = np.concatenate(([True], np.diff(s) > 0.0))
    return np.interp(grid, s[keep], values[keep])


@dataclass(frozen=True)
class SteerDominance:
    """前后轮转角关系统计 (仅统计两轴都有明显转角的样本)。"""
    samples: int
    same_sign_fraction: float
    front_larger_fraction: float


TRANSIENT_LEVEL = 0.5


def steer_dominance(delta_f: Sequence[float], delta_r: Sequence[float], min_angle: float = 1e-3,
                    r_ref: Optional[Sequence[float]] = None,
                    transient_level: float = TRANSIENT_LEVEL) -> SteerDominance:
    """
    统计前后轮转角同号比例以及 |delta_f| > |delta_r| 的比例。

    Args:
        delta_f: 前轮转角序列 [rad]。
        delta_r: 后轮转角序列 [rad]。
        min_angle: 两轴转角都超过该值的样本才参与统计 [rad]。
        r_ref: 参考横摆角速度序列。给出时只统计横摆瞬态, 即 |r_ref| 不小于其峰值 transient_level 倍的样本。
        transient_level: 瞬态判定比例, 取值 (0, 1]。
    """
    delta_f = np.asarray(delta_f, dtype=float)
    delta_r = np.asarray(delta_r, dtype=float)
    active = (np.abs(delta_f) > min_angle) & (np.abs(delta_r) > min_angle)
    if r_ref is not None:
        if not 0.0 < transient_level <= 1.0:
            raise DomainError(f"transient level must be in (0, 1], got {transient_level}")
        r_ref = np.abs(np.asarray(r_ref, dtype=float))
        if r_ref.shape != delta_f.shape:
            raise EvaluationError("r_ref and steering channels differ in length")
        peak = float(np.max(r_ref)) if r_ref.size else 0.0
        active &= (r_ref >= transient_level * peak) & (r_ref > 0.0)
    n = int(np.sum(active))
    if n == 0:
        return SteerDominance(0, float("nan"), float("nan"))
    f, r = delta_f[active], delta_r[active]
    return SteerDominance(n, float(np.mean(np.sign(f) == np.sign(r))), float(np.mean(np.abs(f) > np.abs(r))))


@dataclass(frozen=True)
class DriftSummary:
    max_abs_u_ydes: float
    max_abs_uy: float
    max_abs_e_uy: float
    first_exceed_time: Optional[float]


def pure_integrator_drift(telemetry: Telemetry, limit: float = 1.0) -> DriftSummary:
    """期望与测量侧向速度的漂移幅度, 以及 |u_ydes| 或 |uy| 首次超过 ``limit`` 的时刻"""
    u_ydes = np.abs(telemetry["u_ydes"])
    uy = np.abs(telemetry["uy"])
    exceeded = np.nonzero((u_ydes > limit) | (uy > limit))[0]
    first = float(telemetry["t"][exceeded[0]]) if exceeded.size else None
    return DriftSummary(float(np.max(u_ydes)), float(np.max(uy)),
                        float(np.max(np.abs(telemetry["e_uy"]))), first)


def thresholds_from_config(points: Optional[Iterable[Sequence[float]]]) -> ThresholdTable:
    table = ThresholdTable()
    return table.extended(points) if points else table
