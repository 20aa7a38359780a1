# src/core/settings.py
"""
场景配置

配置文件为分块的 YAML, 每个叶子用点分键访问, 键的后缀表示单位
(``vehicle.delta_f_max_deg``, ``gains.K_rsat_Nms``, ``run.dt_s``)。
``CONFIG_KEYS`` 是唯一的键注册表: 提供默认值, 拒绝未知键并生成命令行帮助。
度和 mph 只在这里换算为国际单位。
"""
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from src.control.gains import DEFAULT_ELEMENTS, GainSet
from src.control.tracking_controller import ControllerConfig
from src.core.errors import ConfigError
from src.core.vehicle import VehicleParams, deg2rad, mph_to_mps, validate
from src.models.haptics import HapticParams
from src.models.plant import ActuatorConfig, MeasurementNoise, PlantConfig
from src.models.reference_model import PedalMap
from src.scenario.driver import DriverModel
from src.scenario.maneuver import KINDS, Maneuver, build_maneuver
from src.services.evaluation_service import ThresholdTable, thresholds_from_config
from src.utils.sim_utils import config_hash, load_config, log

OUTPUT_DIR_ENV = "SPEEDEMU_OUTPUT_DIR"
MODES = ("emulated", "manual")
# preview time per maneuver kind when driver.preview_time_s is not set
PREVIEW_DEFAULTS = {"dlc": 1.0, "weave": 0.72, "straight": 1.0}
# keys that do not change what a run computes
UNHASHED_KEYS = ("run.output_dir", "run.progress")


@dataclass(frozen=True)
class ConfigKey:
    key: str
    default: Any
    help: str


CONFIG_KEYS: Tuple[ConfigKey, ...] = (
    ConfigKey("mode", "emulated", "emulated | manual (manual forces f = 1, no rear steering)"),
    # vehicle
    ConfigKey("vehicle.m_kg", 2000.0, "vehicle mass [kg]"),
    ConfigKey("vehicle.Iz_kgm2", 2400.0, "yaw inertia [kg*m^2]"),
    ConfigKey("vehicle.a_m", 1.52, "CG to front axle [m]"),
    ConfigKey("vehicle.b_m", 1.35, "CG to rear axle [m]"),
    ConfigKey("vehicle.d_m", 1.63, "track width [m]"),
    ConfigKey("vehicle.SR", 15.0, "steering ratio [-]"),
    ConfigKey("vehicle.Cf_Nprad", 75000.0, "front axle cornering stiffness [N/rad]"),
    ConfigKey("vehicle.Cr_Nprad", 110000.0, "rear axle cornering stiffness [N/rad]"),
    ConfigKey("vehicle.mu", 0.9, "friction coefficient [-]"),
    ConfigKey("vehicle.delta_f_max_deg", 18.0, "front road-wheel angle limit [deg]"),
    ConfigKey("vehicle.delta_r_max_deg", 33.0, "rear road-wheel angle limit [deg]"),
    ConfigKey("vehicle.seat_dx_m", 0.4, "driver seat ahead of CG [m]"),
    ConfigKey("vehicle.seat_dy_m", 0.35, "driver seat left of CG [m]"),
    ConfigKey("vehicle.g_mps2", 9.81, "gravity [m/s^2]"),
    # error-matrix elements, axle gains are solved from these
    ConfigKey("gains.K1_1ps", DEFAULT_ELEMENTS["K1"], "error matrix element K1 [1/s]"),
    ConfigKey("gains.K2_1ps2", DEFAULT_ELEMENTS["K2"], "error matrix element K2 [1/s^2]"),
    ConfigKey("gains.K3_1pms", DEFAULT_ELEMENTS["K3"], "error matrix element K3 [1/(m*s)]"),
    ConfigKey("gains.K4_1pms2", DEFAULT_ELEMENTS["K4"], "error matrix element K4 [1/(m*s^2)]"),
    ConfigKey("gains.K5_mps", DEFAULT_ELEMENTS["K5"], "error matrix element K5 [m/s]"),
    ConfigKey("gains.K6_mps2", DEFAULT_ELEMENTS["K6"], "error matrix element K6 [m/s^2]"),
    ConfigKey("gains.K7_1ps", DEFAULT_ELEMENTS["K7"], "error matrix element K7 [1/s]"),
    ConfigKey("gains.K8_1ps2", DEFAULT_ELEMENTS["K8"], "error matrix element K8 [1/s^2]"),
    ConfigKey("gains.K_rsat_Nms", -12000.0, "yaw gain of the rear-only law under front saturation [N*m*s], < 0"),
    ConfigKey("gains.integral", True, "false zeroes every integral gain (proportional-only loop)"),
    # controller
    ConfigKey("controller.rate_limit_dps", 500.0, "road-wheel command slew limit [deg/s]"),
    ConfigKey("controller.tol_rad", 1e-8, "force-to-steering fixed-point tolerance [rad]"),
    ConfigKey("controller.max_iter", 10, "force-to-steering fixed-point iterations [-]"),
    ConfigKey("controller.max_fallback_ticks", 50, "consecutive small-angle fallbacks before the run aborts [-]"),
    # haptics
    ConfigKey("haptics.b_hw_Nmsprad", 1.0, "hand-wheel damping [N*m*s/rad]"),
    ConfigKey("haptics.J_hw_kgm2", 0.03, "emulated hand-wheel inertia [kg*m^2]"),
    ConfigKey("haptics.w_floor", 0.2, "floor of the slip-angle weighting [-]"),
    ConfigKey("haptics.w_sigma_deg", 3.0, "width of the slip-angle weighting [deg]"),
    ConfigKey("haptics.k_align_m", 0.0015, "aligning torque per front lateral force [m]"),
    ConfigKey("haptics.k_jack_Nmprad", 2.0, "jacking torque stiffness [N*m/rad]"),
    ConfigKey("haptics.J_column_kgm2", 0.02, "intrinsic hand-wheel/column inertia [kg*m^2]"),
    # pedals
    ConfigKey("pedals.F_throttle_max_N", 4000.0, "total drive force at full throttle [N]"),
    ConfigKey("pedals.F_brake_max_N", 8000.0, "total brake force at full brake [N]"),
    ConfigKey("pedals.drive_front_frac", 0.0, "front share of drive force [-]"),
    ConfigKey("pedals.brake_front_frac", 0.6, "front share of brake force [-]"),
    # maneuver
    ConfigKey("maneuver.kind", "dlc", "dlc | weave | straight"),
    ConfigKey("maneuver.target_speed_mph", None, "reference speed [mph] (default 30, weave 60)"),
    ConfigKey("maneuver.f", None, "speed scaling factor, >= 1 (default 2, weave 3)"),
    ConfigKey("maneuver.lane_offset_m", 3.5, "lateral lane offset [m]"),
    ConfigKey("maneuver.sections_m", [12.0, 13.5, 11.0, 12.5, 12.0],
              "dlc sections: entry, change, hold, return, exit [m]"),
    ConfigKey("maneuver.run_out_m", 10.0, "distance driven past the course [m]"),
    ConfigKey("maneuver.weave_wavelength_m", 95.0, "weave period along the road [m]"),
    ConfigKey("maneuver.weave_cycles", 4, "weave periods [-]"),
    ConfigKey("maneuver.weave_lead_m", 35.0, "straight before the weave [m]"),
    ConfigKey("maneuver.weave_run_out_m", 35.0, "straight after the weave [m]"),
    ConfigKey("maneuver.straight_length_m", 100.0, "straight course length [m]"),
    # driver
    ConfigKey("driver.preview_time_s", None, "preview time [s] (default 1.0, weave 0.72)"),
    ConfigKey("driver.steer_gain_radpm", 0.6, "hand-wheel angle per previewed lateral error [rad/m]"),
    ConfigKey("driver.hw_rate_limit_dps", 600.0, "hand-wheel rate limit [deg/s]"),
    ConfigKey("driver.hw_limit_deg", 360.0, "hand-wheel angle limit [deg]"),
    ConfigKey("driver.lag_tau_s", 0.05, "neuromuscular lag [s]"),
    ConfigKey("driver.speed_kp", 0.3, "speed governor proportional gain [1/(m/s)]"),
    ConfigKey("driver.speed_ki", 0.05, "speed governor integral gain [1/m]"),
    # plant
    ConfigKey("plant.actuator_tau_s", 0.02, "steering actuator time constant [s], 0 = ideal"),
    ConfigKey("plant.actuator_rate_dps", 500.0, "steering actuator slew limit [deg/s]"),
    ConfigKey("plant.rear_misalignment_deg", 0.0, "constant rear steering bias [deg]"),
    ConfigKey("plant.noise_ux_mps", 0.0, "measurement noise std of ux [m/s]"),
    ConfigKey("plant.noise_uy_mps", 0.0, "measurement noise std of uy [m/s]"),
    ConfigKey("plant.noise_r_radps", 0.0, "measurement noise std of r [rad/s]"),
    ConfigKey("plant.noise_ay_mps2", 0.0, "measurement noise std of ay [m/s^2]"),
    ConfigKey("plant.noise_rdot_radps2", 0.0, "measurement noise std of yaw acceleration [rad/s^2]"),
    # evaluation
    ConfigKey("evaluation.threshold_points", [], "extra [amplitude_dps, threshold_dps] pairs for the yaw threshold table"),
    # run
    ConfigKey("run.dt_s", 0.001, "tick length [s], in (0, 0.01]"),
    ConfigKey("run.duration_s", 0.0, "run length [s], 0 = until the maneuver ends"),
    ConfigKey("run.max_duration_s", 120.0, "hard cap on run length [s]"),
    ConfigKey("run.seed", 0, "noise seed [-]"),
    ConfigKey("run.output_dir", "runs", f"output directory (env {OUTPUT_DIR_ENV} overrides)"),
    ConfigKey("run.name", "", "file stem of the outputs (default: config file stem or maneuver kind)"),
    ConfigKey("run.progress", True, "show a progress bar"),
)

DEFAULTS: Dict[str, Any] = {k.key: k.default for k in CONFIG_KEYS}


@dataclass(frozen=True)
class ScenarioConfig:
    vehicle: VehicleParams
    gains: GainSet
    matrix_elements: Dict[str, float]
    controller: ControllerConfig
    haptics: HapticParams
    pedals: PedalMap
    maneuver: Maneuver
    driver: DriverModel
    plant: PlantConfig
    thresholds: ThresholdTable
    mode: str = "emulated"
    dt: float = 0.001
    duration: float = 0.0
    max_duration: float = 120.0
    seed: int = 0
    output_dir: str = "runs"
    name: str = "run"
    progress: bool = True
    flat: Dict[str, Any] = field(default_factory=dict)

    @property
    def manual(self) -> bool:
        return self.mode == "manual"

    @property
    def sha256(self) -> str:
        return config_hash(self.echo())

    def echo(self) -> Dict[str, Any]:
        """用于遥测表头和报告的扁平键值回显, 不含输出位置"""
        return {k: v for k, v in self.flat.items() if k not in UNHASHED_KEYS}


def flatten(data: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """将嵌套配置块展开为点分键, 列表保持为叶子"""
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def help_epilog() -> str:
    """``--help`` 中列出的全部配置键及其默认值和单位"""
    width = max(len(k.key) for k in CONFIG_KEYS)
    lines = ["configuration keys (YAML blocks, dotted here):"]
    for k in CONFIG_KEYS:
        default = "per kind" if k.default is None else k.default
        lines.append(f"  {k.key:<{width}}  {k.help} (default: {default})")
    return "\n".join(lines)


def _number(flat: Mapping[str, Any], key: str, violations: List[str]) -> float:
    value = flat[key]
    try:
        number = float(value)
    except (TypeError, ValueError):
        violations.append(f"{key} must be a number, got {value!r}")
        return math.nan
    if not math.isfinite(number):
        violations.append(f"{key} must be finite")
    return number


def _build(flat: Dict[str, Any], name: str) -> ScenarioConfig:
    violations: List[str] = []
    def num(key: str) -> float:
        return _number(flat, key, violations)

    mode = flat["mode"]
    if mode not in MODES:
        violations.append(f"mode must be one of {MODES}, got {mode!r}")

    kind = flat["maneuver.kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown maneuver kind '{kind}'")

    vehicle = VehicleParams(
        m=num("vehicle.m_kg"), Iz=num("vehicle.Iz_kgm2"), a=num("vehicle.a_m"), b=num("vehicle.b_m"),
        d=num("vehicle.d_m"), SR=num("vehicle.SR"), Cf=num("vehicle.Cf_Nprad"), Cr=num("vehicle.Cr_Nprad"),
        mu=num("vehicle.mu"), delta_f_max=deg2rad(num("vehicle.delta_f_max_deg")),
        delta_r_max=deg2rad(num("vehicle.delta_r_max_deg")), seat_dx=num("vehicle.seat_dx_m"),
        seat_dy=num("vehicle.seat_dy_m"), g=num("vehicle.g_mps2"))
    violations.extend(validate(vehicle))

    dt = num("run.dt_s")
    if not 0.0 < dt <= 0.01:
        violations.append("run.dt_s must be in (0, 0.01]")
    duration = num("run.duration_s")
    max_duration = num("run.max_duration_s")
    if duration < 0.0 or not max_duration > 0.0:
        violations.append("run.duration_s must be >= 0 and run.max_duration_s > 0")
    if violations:
        raise ConfigError("invalid configuration", violations)

    try:
        elements = {key: num(f"gains.{key}_{unit}") for key, unit in
                    (("K1", "1ps"), ("K2", "1ps2"), ("K3", "1pms"), ("K4", "1pms2"),
                     ("K5", "mps"), ("K6", "mps2"), ("K7", "1ps"), ("K8", "1ps2"))}
        gains = GainSet.from_matrix_elements(elements, vehicle, K_rsat=num("gains.K_rsat_Nms"))
        if not flat["gains.integral"]:
            gains = gains.without_integral()
        controller = ControllerConfig(
            rate_limit=deg2rad(num("controller.rate_limit_dps")), tol=num("controller.tol_rad"),
            max_iter=int(flat["controller.max_iter"]),
            max_fallback_ticks=int(flat["controller.max_fallback_ticks"]))
        haptics = HapticParams(
            b_hw=num("haptics.b_hw_Nmsprad"), J_hw=num("haptics.J_hw_kgm2"), w_floor=num("haptics.w_floor"),
            w_sigma=deg2rad(num("haptics.w_sigma_deg")), k_align=num("haptics.k_align_m"),
            k_jack=num("haptics.k_jack_Nmprad"), J_column=num("haptics.J_column_kgm2"))
        pedals = PedalMap(
            F_throttle_max=num("pedals.F_throttle_max_N"), F_brake_max=num("pedals.F_brake_max_N"),
            drive_front=num("pedals.drive_front_frac"), brake_front=num("pedals.brake_front_frac"))

        overrides: Dict[str, Any] = {
            "lane_offset": num("maneuver.lane_offset_m"),
            "sections": tuple(float(x) for x in flat["maneuver.sections_m"]),
            "run_out": num("maneuver.run_out_m"),
            "weave_wavelength": num("maneuver.weave_wavelength_m"),
            "weave_cycles": int(flat["maneuver.weave_cycles"]),
            "weave_lead": num("maneuver.weave_lead_m"),
            "weave_run_out": num("maneuver.weave_run_out_m"),
            "straight_length": num("maneuver.straight_length_m"),
        }
        if flat["maneuver.target_speed_mph"] is not None:
            overrides["target_speed"] = mph_to_mps(num("maneuver.target_speed_mph"))
        if flat["maneuver.f"] is not None:
            overrides["f"] = num("maneuver.f")
        if mode == "manual":
            if overrides.get("f", 1.0) != 1.0:
                log.warning(f"手动模式直接驾驶车辆, 忽略 maneuver.f={overrides['f']}")
            overrides["f"] = 1.0
        maneuver = build_maneuver(kind, overrides)

        preview = flat["driver.preview_time_s"]
        driver = DriverModel(
            preview_time=PREVIEW_DEFAULTS[kind] if preview is None else num("driver.preview_time_s"),
            steer_gain=num("driver.steer_gain_radpm"), hw_rate_limit=deg2rad(num("driver.hw_rate_limit_dps")),
            hw_limit=deg2rad(num("driver.hw_limit_deg")), lag_tau=num("driver.lag_tau_s"),
            speed_kp=num("driver.speed_kp"), speed_ki=num("driver.speed_ki"))
        seed = int(flat["run.seed"])
        plant = PlantConfig(
            actuator=ActuatorConfig(tau_s=num("plant.actuator_tau_s"),
                                    rate_limit=deg2rad(num("plant.actuator_rate_dps"))),
            noise=MeasurementNoise(ux=num("plant.noise_ux_mps"), uy=num("plant.noise_uy_mps"),
                                   r=num("plant.noise_r_radps"), ay=num("plant.noise_ay_mps2"),
                                   rdot=num("plant.noise_rdot_radps2")),
            rear_misalignment=deg2rad(num("plant.rear_misalignment_deg")),
            seed=seed)
        thresholds = thresholds_from_config(flat["evaluation.threshold_points"])
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigError(f"invalid configuration: {e}", violations) from e
    if violations:
        raise ConfigError("invalid configuration", violations)

    output_dir = os.environ.get(OUTPUT_DIR_ENV) or str(flat["run.output_dir"])
    return ScenarioConfig(
        vehicle=vehicle, gains=gains, matrix_elements=elements, controller=controller, haptics=haptics,
        pedals=pedals, maneuver=maneuver, driver=driver, plant=plant, thresholds=thresholds,
        mode=mode, dt=dt, duration=duration, max_duration=max_duration, seed=seed,
        output_dir=output_dir, name=str(flat["run.name"]) or name, progress=bool(flat["run.progress"]),
        flat=flat)


def from_mapping(data: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None,
                 name: str = "") -> ScenarioConfig:
    """
    由嵌套数据和点分键覆盖项构建场景配置

    Args:
        data: YAML 结构的嵌套配置
        overrides: 点分键覆盖项, 优先于 data
        name: 场景名称, 为空时取 maneuver.kind

    Raises:
        ConfigError: 存在未知键或取值无效
    """
    given = flatten(data or {})
    given.update(overrides or {})
    unknown = sorted(set(given) - set(DEFAULTS))
    if unknown:
        raise ConfigError("unknown configuration key(s)", unknown)
    flat = dict(DEFAULTS)
    flat.update(given)
    return _build(flat, name or str(flat["maneuver.kind"]))


def load(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ScenarioConfig:
    """
    读取场景 YAML 文件

    Args:
        path: 配置文件路径, 为 None 时只使用默认值
        overrides: 点分键覆盖项
    """
    data: Dict[str, Any] = {}
    name = ""
    if path:
        try:
            data = load_config(path)
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except (yaml.YAMLError, ValueError) as e:
            raise ConfigError(f"cannot parse config '{path}': {e}") from e
        name = os.path.splitext(os.path.basename(path))[0]
    return from_mapping(data, overrides, name)
