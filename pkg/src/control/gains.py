# src/control/gains.py
"""
跟踪控制器的反馈增益与线性误差动力学检查

对四个误差通道 x in (r, rI, uy, uyI), 轴增益 (N/单位误差) 与八个误差矩阵元素的关系为

    K_yaw = (-a*K_1x + b*K_2x) / Iz        K_lat = (-K_1x - K_2x) / m

误差状态为 [e_r, int e_r, e_uy, int e_uy], 矩阵各行为
[K1 K2 K3 K4; 1 0 0 0; K5 K6 K7 K8; 0 0 1 0]。
"""
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from src.core.errors import DomainError
from src.core.vehicle import VehicleParams, default_params

MATRIX_KEYS = ("K1", "K2", "K3", "K4", "K5", "K6", "K7", "K8")
AXLE_KEYS = ("K_1r", "K_1rI", "K_1uy", "K_1uyI", "K_2r", "K_2rI", "K_2uy", "K_2uyI")

# (yaw element, lateral element, front gain, rear gain)
PAIRS = (
    ("K1", "K5", "K_1r", "K_2r"),
    ("K2", "K6", "K_1rI", "K_2rI"),
    ("K3", "K7", "K_1uy", "K_2uy"),
    ("K4", "K8", "K_1uyI", "K_2uyI"),
)

DEFAULT_ELEMENTS: Dict[str, float] = {
    "K1": -24.9, "K2": -74.7, "K3": 1.2, "K4": 3.6,
    "K5": 3.0, "K6": 9.0, "K7": -15.0, "K8": -45.0,
}
K_RSAT_DEFAULT = -12000.0


@dataclass(frozen=True)
class GainSet:
    K_1r: float = 0.0
    K_1rI: float = 0.0
    K_1uy: float = 0.0
    K_1uyI: float = 0.0
    K_2r: float = 0.0
    K_2rI: float = 0.0
    K_2uy: float = 0.0
    K_2uyI: float = 0.0
    K_rsat: float = K_RSAT_DEFAULT

    def __post_init__(self):
        if not self.K_rsat < 0.0:
            raise DomainError(f"K_rsat must be negative, got {self.K_rsat}")

    @classmethod
    def from_matrix_elements(cls, elements: Mapping[str, float], params: VehicleParams,
                             K_rsat: float = K_RSAT_DEFAULT) -> "GainSet":
        return cls(K_rsat=K_rsat, **solve_axle_gains(elements, params))

    def axle_gains(self) -> Dict[str, float]:
        return {key: getattr(self, key) for key in AXLE_KEYS}

    def matrix_elements(self, params: VehicleParams) -> Dict[str, float]:
        return matrix_elements(self.axle_gains(), params)

    def without_integral(self) -> "GainSet":
        """保留比例增益, 去掉积分反馈"""
        return replace(self, K_1rI=0.0, K_1uyI=0.0, K_2rI=0.0, K_2uyI=0.0)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def solve_axle_gains(elements: Mapping[str, float], params: VehicleParams) -> Dict[str, float]:
    """
    由矩阵元素反解八个轴增益

    Args:
        elements: K1..K8 误差矩阵元素
        params: 车辆参数, 提供 a, b, m, Iz

    Raises:
        DomainError: 缺少元素或 a, b 使配对方程奇异
    """
    missing = [key for key in MATRIX_KEYS if key not in elements]
    if missing:
        raise DomainError(f"missing matrix elements: {missing}")
    # [-a  b] [K_1x]   [Iz * K_yaw]
    # [-1 -1] [K_2x] = [m  * K_lat]
    system = np.array([[-params.a, params.b], [-1.0, -1.0]])
    if abs(np.linalg.det(system)) < 1e-12:
        raise DomainError(f"singular gain pairing for a={params.a}, b={params.b}")
    gains: Dict[str, float] = {}
    for yaw_key, lat_key, front_key, rear_key in PAIRS:
        rhs = np.array([params.Iz * elements[yaw_key], params.m * elements[lat_key]])
        front, rear = np.linalg.solve(system, rhs)
        gains[front_key] = float(front)
        gains[rear_key] = float(rear)
    return gains


def matrix_elements(axle: Mapping[str, float], params: VehicleParams) -> Dict[str, float]:
    elements: Dict[str, float] = {}
    for yaw_key, lat_key, front_key, rear_key in PAIRS:
        front, rear = axle[front_key], axle[rear_key]
        elements[yaw_key] = (-params.a * front + params.b * rear) / params.Iz
        elements[lat_key] = (-front - rear) / params.m
    return elements


def error_dynamics_matrix(elements: Mapping[str, float]) -> np.ndarray:
    k = [float(elements[key]) for key in MATRIX_KEYS]
    return np.array([
        [k[0], k[1], k[2], k[3]],
        [1.0, 0.0, 0.0, 0.0],
        [k[4], k[5], k[6], k[7]],
        [0.0, 0.0, 1.0, 0.0],
    ])


@dataclass(frozen=True)
class EigenReport:
    eigenvalues: np.ndarray
    stable: bool

    def lines(self) -> List[str]:
        rows = [f"lambda_{i + 1} = {ev.real:+.6f} {ev.imag:+.6f}j" for i, ev in enumerate(self.eigenvalues)]
        rows.append("STABLE" if self.stable else "UNSTABLE")
        return rows


def eigencheck(elements: Mapping[str, float]) -> EigenReport:
    """误差矩阵的特征值, 所有实部为负时稳定, 实部在舍入误差内为零的视为临界而非稳定"""
    eigenvalues = np.linalg.eigvals(error_dynamics_matrix(elements))
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    tol = 1e-9 * max(1.0, float(np.max(np.abs(eigenvalues))))
    return EigenReport(eigenvalues, bool(np.all(eigenvalues.real < -tol)))


def characteristic_polynomial(elements: Mapping[str, float]) -> np.ndarray:
    """首一多项式系数, 高次在前"""
    return np.real(np.poly(error_dynamics_matrix(elements)))


def simulate_error_dynamics(elements: Mapping[str, float], x0: Sequence[float],
                            times: Sequence[float]) -> np.ndarray:
    """线性误差模型的精确解 x(t) = expm(A t) x0, 每个时刻一行"""
    A = error_dynamics_matrix(elements)
    x0 = np.asarray(x0, dtype=float)
    return np.array([expm(A * t) @ x0 for t in times])


def default_gains(params: Optional[VehicleParams] = None) -> GainSet:
    """由默认矩阵元素综合出的轴增益"""
    return GainSet.from_matrix_elements(DEFAULT_ELEMENTS, params or default_params())
