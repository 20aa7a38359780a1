# src/scenario/maneuver.py
"""
虚拟道路上的目标路径

道路从原点向北延伸: 沿路距离即北向坐标 N, 中心线左侧的侧向偏移为 -E。
偏移量随 s 平滑变化 (余弦过渡), 预瞄驾驶员可以跟随。
"""
import math
from dataclasses import dataclass, fields, replace
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import ConfigError
from src.core.vehicle import mph_to_mps

KINDS = ("dlc", "weave", "straight")
# per-kind departures from the Maneuver field defaults
KIND_DEFAULTS = {
    "weave": {"target_speed": mph_to_mps(60.0), "f": 3.0},
}


@dataclass(frozen=True)
class Gate:
    s: float
    offset: float


@dataclass(frozen=True)
class Maneuver:
    kind: str = "dlc"
    target_speed: float = mph_to_mps(30.0)
    f: float = 2.0
    lane_offset: float = 3.5
    # entry hold, lane change, side-lane hold, return, exit hold
    sections: Tuple[float, ...] = (12.0, 13.5, 11.0, 12.5, 12.0)
    run_out: float = 10.0
    weave_wavelength: float = 95.0
    weave_cycles: int = 4
    weave_lead: float = 35.0
    weave_run_out: float = 35.0
    straight_length: float = 100.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown maneuver kind '{self.kind}' (expected one of {', '.join(KINDS)})")
        if not self.f >= 1.0:
            raise ConfigError(f"speed scaling factor must be >= 1, got {self.f}")
        if not self.target_speed > 0.0:
            raise ConfigError("target speed must be positive")
        if len(self.sections) != 5:
            raise ConfigError("dlc needs exactly five section lengths")
        lengths = (*self.sections, self.weave_wavelength, self.straight_length)
        if any(not x > 0.0 for x in lengths) or self.weave_cycles < 1:
            raise ConfigError("maneuver lengths must be positive")
        if self.run_out < 0.0 or self.weave_lead < 0.0 or self.weave_run_out < 0.0:
            raise ConfigError("lead-in and run-out lengths must be non-negative")

    @property
    def plant_speed(self) -> float:
        """被控车辆的实际车速, 参考车速由它缩放得到"""
        return self.target_speed / self.f

    @property
    def course_length(self) -> float:
        if self.kind == "dlc":
            return float(sum(self.sections))
        if self.kind == "weave":
            return self.weave_lead + self.weave_cycles * self.weave_wavelength + self.weave_run_out
        return self.straight_length

    @property
    def end_distance(self) -> float:
        """运行结束时的沿路距离"""
        return self.course_length + self.run_out

    def _dlc_offset(self, s: float) -> float:
        entry, change, hold, back, _ = self.sections
        up_start = entry
        up_end = up_start + change
        down_start = up_end + hold
        down_end = down_start + back
        if s <= up_start or s >= down_end:
            return 0.0
        if s < up_end:
            return self.lane_offset * _blend((s - up_start) / change)
        if s <= down_start:
            return self.lane_offset
        return self.lane_offset * (1.0 - _blend((s - down_start) / back))

    def _weave_offset(self, s: float) -> float:
        start = self.weave_lead
        end = start + self.weave_cycles * self.weave_wavelength
        if s <= start or s >= end:
            return 0.0
        return 0.5 * self.lane_offset * (1.0 - math.cos(2.0 * math.pi * (s - start) / self.weave_wavelength))

    def target_offset(self, s: float) -> float:
        """沿路距离 ``s`` 处的侧向目标 (m, 左正)"""
        if self.kind == "dlc":
            return self._dlc_offset(s)
        if self.kind == "weave":
            return self._weave_offset(s)
        return 0.0

    def target_offsets(self, s: Sequence[float]) -> np.ndarray:
        return np.array([self.target_offset(float(x)) for x in s])

    def gates(self) -> List[Gate]:
        """双移线各保持段中点处的桩门"""
        if self.kind != "dlc":
            return []
        entry, change, hold, back, exit_ = self.sections
        return [Gate(entry / 2.0, 0.0),
                Gate(entry + change + hold / 2.0, self.lane_offset),
                Gate(entry + change + hold + back + exit_ / 2.0, 0.0)]


def _blend(x: float) -> float:
    return 0.5 * (1.0 - math.cos(math.pi * x))


def build_maneuver(kind: str, overrides: Optional[Mapping[str, Any]] = None) -> Maneuver:
    """
    构建指定类型的工况

    Args:
        kind: 工况类型, dlc, weave 或 straight
        overrides: 逐字段覆盖默认值

    Raises:
        ConfigError: 覆盖项中有未知字段
    """
    maneuver = Maneuver(kind=kind, **KIND_DEFAULTS.get(kind, {}))
    if not overrides:
        return maneuver
    known = {f.name for f in fields(Maneuver)} - {"kind"}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown maneuver setting(s): {sorted(unknown)}")
    changes = dict(overrides)
    if "sections" in changes:
        changes["sections"] = tuple(float(x) for x in changes["sections"])
    return replace(maneuver, **changes)


def path_s(E, N):
    """世界坐标点的沿路距离 (标量或数组)"""
    return N


def lateral_offset(E, N):
    """世界坐标点相对中心线的左侧偏移 (标量或数组)"""
    return -E


def preview_point(E: float, N: float, psi: float, distance: float) -> Tuple[float, float]:
    """沿航向前方 ``distance`` 处点的 (s, 左侧偏移)"""
    return path_s(E, N) + distance * math.cos(psi), lateral_offset(E, N) + distance * math.sin(psi)


def gate_errors(s: Sequence[float], offset: Sequence[float], maneuver: Maneuver) -> List[Tuple[Gate, float]]:
    """各桩门处带符号的侧向误差 (轨迹减桩门), 按 s 插值"""
    s = np.asarray(s, dtype=float)
    offset = np.asarray(offset, dtype=float)
    result = []
    for gate in maneuver.gates():
        if s.size == 0 or gate.s < s[0] or gate.s > s[-1]:
            continue
        result.append((gate, float(np.interp(gate.s, s, offset)) - gate.offset))
    return result
