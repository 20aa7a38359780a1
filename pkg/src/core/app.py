# src/core/app.py
"""
定步长运行循环

每个步长依次执行: 驾驶员 -> 参考模型 -> 跟踪控制器 (或手动直通) -> 被控车辆
-> 方向盘力矩 -> 遥测记录。参考模型与被控车辆都从 t-dt 积分到 t,
因此每行记录中两者处于同一时刻。
"""
import os
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from tqdm import tqdm

from src.control.tracking_controller import (ControllerState, control_step, desired_uy_update,
                                             seat_acceleration)
from src.core.errors import DomainError, IntegrationError, SpeedEmuError
from src.core.settings import ScenarioConfig
from src.core.vehicle import Measurements
from src.data.report_manager import ReportManager
from src.data.telemetry import Telemetry, TelemetryRecord, TelemetryWriter
from src.models.haptics import front_lateral_force, steering_torque
from src.models.plant import Plant, PlantState
from src.models.reference_model import (ReferenceModel, ReferenceState, front_steer_angle,
                                        pedals_to_wheel_forces)
from src.scenario.driver import DriverState, driver_step
from src.scenario.maneuver import gate_errors, lateral_offset, path_s
from src.services.evaluation_service import TrackingReport, steer_dominance, tracking_report
from src.utils.sim_utils import log, safe_mkdir

STEPS = 4


@dataclass
class RunResult:
    name: str
    telemetry: Telemetry
    report: TrackingReport
    ticks: int
    saturation_ticks: int
    fallback_ticks: int
    telemetry_path: Optional[str] = None
    report_path: Optional[str] = None
    extras: Dict[str, float] = field(default_factory=dict)


class Simulation:
    """单次运行的全部状态, ``tick`` 将所有模型推进一个 ``dt``"""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        maneuver = config.maneuver
        self.plant = Plant(config.vehicle, config.plant, PlantState(ux=maneuver.plant_speed))
        self.reference = ReferenceModel(config.vehicle, maneuver.f, config.dt, config.pedals,
                                        ReferenceState(ux=maneuver.f * maneuver.plant_speed))
        self.driver = DriverState()
        self.controller = ControllerState.engage(self.plant.measure())
        self.k = 0
        self.saturation_ticks = 0
        self.fallback_ticks = 0

    def _steering(self, ref: ReferenceState, meas: Measurements, delta_hw: float,
                  axle_fx: Tuple[float, float]) -> Tuple[float, float]:
        cfg = self.config
        if cfg.manual:
            # driver drives the plant front axle directly; u_ydes is still logged
            self.controller = desired_uy_update(self.controller, ref, meas, cfg.dt)
            return front_steer_angle(delta_hw, cfg.vehicle), 0.0
        delta_f, delta_r, self.controller = control_step(ref, meas, self.controller, cfg.gains, cfg.vehicle,
                                                         cfg.dt, axle_fx, cfg.controller)
        return delta_f, delta_r

    def tick(self) -> TelemetryRecord:
        cfg = self.config
        vehicle = cfg.vehicle
        try:
            inputs, self.driver = driver_step(self.reference.state, cfg.maneuver, cfg.driver, cfg.dt, self.driver)
            pedal_forces = pedals_to_wheel_forces(inputs, cfg.pedals)
            meas = self.plant.measure()
            ref = self.reference.step(inputs, meas.ux)
            axle_fx = (pedal_forces[0] + pedal_forces[1], pedal_forces[2] + pedal_forces[3])
            delta_f_cmd, delta_r_cmd = self._steering(ref, meas, inputs.delta_hw, axle_fx)
            plant = self.plant.step(delta_f_cmd, delta_r_cmd, pedal_forces, cfg.dt)
        except (DomainError, ValueError) as e:
            raise IntegrationError(f"tick {self.k + 1}: {e}") from e

        # the driver feels the emulated vehicle, or the real one when driving manually
        alpha_f = plant.alpha_f if cfg.manual else ref.alpha_f
        tau_hw = steering_torque(alpha_f, inputs.delta_hw, self.driver.rate, self.driver.accel,
                                 front_lateral_force(alpha_f, vehicle), cfg.haptics)

        self.k += 1
        saturated = (not cfg.manual) and self.controller.saturated
        self.saturation_ticks += int(saturated)
        if self.controller.fallback_ticks:
            self.fallback_ticks += 1
        return TelemetryRecord(
            t=self.k * cfg.dt, s=path_s(ref.E, ref.N),
            delta_hw=inputs.delta_hw, throttle=inputs.throttle, brake=inputs.brake,
            r_ref=ref.r, uy_ref=ref.uy, ux_ref=ref.ux, ux_dot_ref=ref.ux_dot, ay_ref=ref.ay,
            ay_seat_ref=seat_acceleration(ref.ay, ref.r, ref.rdot, vehicle.seat_dx, vehicle.seat_dy),
            psi_ref=ref.psi, E_ref=ref.E, N_ref=ref.N, Mz_ref=ref.Mz, Fy_ref=ref.Fy, alpha_f_ref=ref.alpha_f,
            r=plant.r, uy=plant.uy, ux=plant.ux, ay=plant.ay,
            ay_seat=seat_acceleration(plant.ay, plant.r, plant.rdot, vehicle.seat_dx, vehicle.seat_dy),
            delta_f=plant.delta_f, delta_r=plant.delta_r, saturated=int(saturated), tau_hw=tau_hw,
            e_r=ref.r - plant.r, e_uy=self.controller.u_ydes - plant.uy, e_ay=ref.ay - plant.ay,
            u_ydes=self.controller.u_ydes,
        )

    def finished(self) -> bool:
        """到达设定时长或参考车辆驶过赛道终点时返回 True"""
        cfg = self.config
        if cfg.duration > 0.0:
            return self.k >= int(round(cfg.duration / cfg.dt))
        return self.reference.state.N >= cfg.maneuver.end_distance


def _tick_budget(config: ScenarioConfig) -> int:
    limit = int(round(config.max_duration / config.dt))
    if config.duration > 0.0:
        wanted = int(round(config.duration / config.dt))
        if wanted > limit:
            log.warning(f"run.duration_s={config.duration} 超过 run.max_duration_s={config.max_duration}, 已截断")
        return min(wanted, limit)
    return limit


def _run_extras(config: ScenarioConfig, telemetry: Telemetry) -> Dict[str, float]:
    extras: Dict[str, float] = {"course_extent_m": float(telemetry["s"][-1] - telemetry["s"][0])}
    offset = lateral_offset(telemetry["E_ref"], telemetry["N_ref"])
    for i, (_, error) in enumerate(gate_errors(telemetry["s"], offset, config.maneuver), 1):
        extras[f"gate_{i}_error_m"] = error
    if not config.manual:
        dominance = steer_dominance(telemetry["delta_f"], telemetry["delta_r"], r_ref=telemetry["r_ref"])
        if dominance.samples:
            extras["steer_same_sign_fraction"] = dominance.same_sign_fraction
            extras["steer_front_larger_fraction"] = dominance.front_larger_fraction
    return extras


def run_scenario(config: ScenarioConfig, out_dir: Optional[str] = None, write: bool = True) -> RunResult:
    """
    运行一个场景直到结束, 写出 ``<name>.csv`` 与 ``<name>_report.json`` 并在内存中返回

    Args:
        config: 场景配置
        out_dir: 输出目录, 为 None 时使用配置中的目录
        write: 为 False 时只在内存中保留结果

    SpeedEmuError 会终止运行: 已记录的遥测保留, 追加 FAULT 尾行后重新抛出,
    由调用方映射为退出码。
    """
    start_time = time.time()
    out_dir = out_dir or config.output_dir
    name = config.name
    records: List[TelemetryRecord] = []
    writer: Optional[TelemetryWriter] = None
    sim: Optional[Simulation] = None
    telemetry_path = os.path.join(out_dir, f"{name}.csv") if write else None
    log.info("=" * 50)
    log.info(f"--- 场景 '{name}' 开始运行 (mode={config.mode}, maneuver={config.maneuver.kind}, "
             f"f={config.maneuver.f}) ---")
    try:
        log.info(f"[步骤 1/{STEPS}] 初始化参考模型, 被控车辆与控制器...")
        sim = Simulation(config)

        if write:
            log.info(f"[步骤 2/{STEPS}] 打开遥测文件: {telemetry_path}")
            safe_mkdir(out_dir)
            writer = TelemetryWriter(telemetry_path, config.sha256, config.echo())
        else:
            log.info(f"[步骤 2/{STEPS}] 不写文件, 遥测仅保留在内存中")

        budget = _tick_budget(config)
        log.info(f"[步骤 3/{STEPS}] 仿真循环 (dt={config.dt} s, 最多 {budget} 步)...")
        for _ in tqdm(range(budget), desc=f"仿真 {name}", unit="tick", disable=not config.progress):
            record = sim.tick()
            records.append(record)
            if writer is not None:
                writer.write(record)
            if sim.finished():
                break
        else:
            if config.duration <= 0.0:
                log.warning(f"达到最大仿真时长 {config.max_duration} s, 参考车辆未驶完全程 "
                            f"(s={sim.reference.state.N:.1f} m / {config.maneuver.end_distance:.1f} m)")
        if writer is not None:
            writer.close()

        log.info(f"[步骤 4/{STEPS}] 评估跟踪性能...")
        telemetry = Telemetry.from_records(records)
        report = tracking_report(telemetry, config.thresholds)
        extras = _run_extras(config, telemetry)
        report = replace(report, extras=extras)
        for line in report.lines():
            log.info(f"   {line}")
        report_path = None
        if write:
            report_path = ReportManager(out_dir).save_report(name, report.to_dict(), {
                "name": name, "mode": config.mode, "config_sha256": config.sha256,
                "telemetry": os.path.basename(telemetry_path), "ticks": sim.k,
                "saturation_ticks": sim.saturation_ticks, "fallback_ticks": sim.fallback_ticks,
            })
        return RunResult(name=name, telemetry=telemetry, report=report, ticks=sim.k,
                         saturation_ticks=sim.saturation_ticks, fallback_ticks=sim.fallback_ticks,
                         telemetry_path=telemetry_path, report_path=report_path, extras=extras)

    except SpeedEmuError as e:
        if writer is not None:
            writer.fault(e.kind, str(e))
        log.critical(f"!!! 场景 '{name}' 运行失败 ({e.kind}): {e}")
        raise
    except KeyboardInterrupt:
        if writer is not None:
            writer.fault("interrupted", "run interrupted by user")
        log.warning("\n !!! 用户请求中断仿真 !!!")
        raise
    finally:
        if writer is not None:
            writer.close()
        duration = time.time() - start_time
        log.info("=" * 50)
        log.info(f"--- 场景 '{name}' 运行结束 ---")
        log.info(f"总耗时: {duration:.2f} 秒")
        if sim is not None:
            log.info(f"仿真步数: {sim.k} ({sim.k * config.dt:.3f} s)")
            log.info(f"前轮饱和步数: {sim.saturation_ticks}")
            log.info(f"小角度回退步数: {sim.fallback_ticks}")
        log.info("=" * 50)
