# src/core/vehicle.py
"""
共享的领域类型与物理常量

内部一律使用国际单位 (rad, m, s, N), 度与 mph 只在输入输出边界经下面的换算函数出现。
坐标系采用 ISO 约定: x 向前, y 向左, z 向上, 俯视逆时针为正横摆,
正转角使车轮转向 +y。
"""
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional

import yaml

G_DEFAULT = 9.81
MPH_TO_MPS = 0.44704


def deg2rad(value: float) -> float:
    return value * math.pi / 180.0


def rad2deg(value: float) -> float:
    return value * 180.0 / math.pi


def mph_to_mps(value: float) -> float:
    return value * MPH_TO_MPS


def mps_to_mph(value: float) -> float:
    return value / MPH_TO_MPS


@dataclass(frozen=True)
class VehicleParams:
    """
    试验车的底盘, 轮胎与座椅参数

    ``L``, ``Fz_f`` 和 ``Fz_r`` 为派生量, 保持 ``None`` 即自动计算;
    显式给出时仅用于 :func:`validate` 的一致性检查。
    """
    m: float = 2000.0
    Iz: float = 2400.0
    a: float = 1.52
    b: float = 1.35
    d: float = 1.63
    SR: float = 15.0
    Cf: float = 75000.0
    Cr: float = 110000.0
    mu: float = 0.9
    delta_f_max: float = deg2rad(18.0)
    delta_r_max: float = deg2rad(33.0)
    seat_dx: float = 0.4
    seat_dy: float = 0.35
    g: float = G_DEFAULT
    L: Optional[float] = None
    Fz_f: Optional[float] = None
    Fz_r: Optional[float] = None

    def __post_init__(self):
        # frozen dataclass: derived fields are filled through object.__setattr__
        if self.L is None:
            object.__setattr__(self, "L", self.a + self.b)
        weight_per_length = self.m * self.g / self.L if self.L != 0.0 else math.nan
        if self.Fz_f is None:
            object.__setattr__(self, "Fz_f", weight_per_length * self.b)
        if self.Fz_r is None:
            object.__setattr__(self, "Fz_r", weight_per_length * self.a)

    PRIMARY_FIELDS = ("m", "Iz", "a", "b", "d", "SR", "Cf", "Cr", "mu",
                      "delta_f_max", "delta_r_max", "seat_dx", "seat_dy", "g")

    def primaries(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in self.PRIMARY_FIELDS}

    def with_derived(self) -> "VehicleParams":
        """由基本参数重新计算 L, Fz_f, Fz_r (幂等)"""
        return VehicleParams(**self.primaries())

    def updated(self, **changes: float) -> "VehicleParams":
        """
        复制并修改基本参数

        Args:
            **changes: 要修改的参数, 未显式给出的派生量随之更新
        """
        values: Dict[str, Any] = self.primaries()
        values.update(changes)
        return VehicleParams(**values)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VehicleParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise KeyError(f"unknown vehicle parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items() if v is not None})

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_yaml(cls, text: str) -> "VehicleParams":
        return cls.from_dict(yaml.safe_load(text) or {})


@dataclass(frozen=True)
class DriverInputs:
    """方向盘转角 (rad) 与归一化踏板量, 方向盘可以转过 SR·delta_f_max, 参考前轮转角在下游限幅"""
    delta_hw: float = 0.0
    throttle: float = 0.0
    brake: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.throttle <= 1.0):
            raise ValueError(f"throttle must be in [0, 1], got {self.throttle}")
        if not (0.0 <= self.brake <= 1.0):
            raise ValueError(f"brake must be in [0, 1], got {self.brake}")


@dataclass(frozen=True)
class Measurements:
    """车载惯导对被控车辆的测量"""
    ux: float
    uy: float
    r: float
    ay: float = 0.0
    rdot: float = 0.0

    def __post_init__(self):
        values = (self.ux, self.uy, self.r, self.ay, self.rdot)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"measurements must be finite: {values}")
        if self.ux < 0.0:
            raise ValueError(f"ux must be non-negative, got {self.ux}")


def default_params() -> VehicleParams:
    """试验车参数, 座椅偏置取默认的 (0.4, 0.35) m"""
    return VehicleParams()


def validate(params: VehicleParams) -> List[str]:
    """
    检查参数集

    Args:
        params: 待检查的车辆参数

    Returns:
        所有违反的约束, 空列表表示参数有效
    """
    violations: List[str] = []
    for name in ("m", "Iz", "a", "b", "d", "Cf", "Cr", "g"):
        value = getattr(params, name)
        if not (math.isfinite(value) and value > 0.0):
            violations.append(f"{name} must be positive")
    if not (0.0 < params.mu <= 2.0):
        violations.append("mu must be in (0, 2]")
    if not params.SR >= 1.0:
        violations.append("SR must be at least 1")
    for name in ("delta_f_max", "delta_r_max"):
        value = getattr(params, name)
        if not (0.0 < value < math.pi / 2):
            violations.append(f"{name} must be in (0, pi/2)")
    for name in ("seat_dx", "seat_dy"):
        if not math.isfinite(getattr(params, name)):
            violations.append(f"{name} must be finite")
    if not math.isclose(params.L, params.a + params.b, rel_tol=1e-12, abs_tol=0.0):
        violations.append("L must equal a+b")
    if not math.isclose(params.Fz_f + params.Fz_r, params.m * params.g, rel_tol=1e-9):
        violations.append("Fz_f + Fz_r must equal m*g")
    return violations
