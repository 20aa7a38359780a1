"""End-to-end scenario runs against the expected emulation behaviour.

Each test drives the whole loop (driver, reference, controller, plant) for a
full maneuver, so the module is marked ``slow``.
"""
import filecmp
import os

import numpy as np
import pytest

from src.core import app, settings
from src.core.vehicle import rad2deg
from src.services.evaluation_service import compare_runs, pure_integrator_drift, yaw_threshold
from src.services.spectrum_service import spectral_agreement

pytestmark = pytest.mark.slow

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "config")


def _load(stem, tmp_path, **overrides):
    flat = {"run.output_dir": str(tmp_path), "run.progress": False}
    flat.update(overrides)
    return settings.load(os.path.join(CONFIG_DIR, f"{stem}.yaml"), flat)


@pytest.fixture(scope="module")
def dlc_run(tmp_path_factory):
    return app.run_scenario(_load("dlc_emulated", tmp_path_factory.mktemp("dlc")))


@pytest.fixture(scope="module")
def weave_run(tmp_path_factory):
    return app.run_scenario(_load("weave", tmp_path_factory.mktemp("weave")))


def test_dlc_emulation(dlc_run):
    report = dlc_run.report
    assert 15.0 <= report.peak_r_ref_dps <= 25.0
    assert report.compliance_pct >= 95.0
    assert 3.5 <= report.peak_ay_seat <= 5.5
    assert dlc_run.extras["steer_same_sign_fraction"] > 0.5
    assert dlc_run.extras["steer_front_larger_fraction"] > 0.5
    assert dlc_run.fallback_ticks == 0


def test_dlc_passes_every_gate(dlc_run):
    for gate in (1, 2, 3):
        assert abs(dlc_run.extras[f"gate_{gate}_error_m"]) <= 0.5, gate
    offset = -dlc_run.telemetry["E_ref"]
    assert offset.max() > 2.5
    assert abs(offset[-1]) < 1.0


def test_weave_emulation(weave_run):
    report = weave_run.report
    assert 9.0 <= report.peak_r_ref_dps <= 16.0
    assert report.compliance_pct >= 95.0
    assert report.threshold_dps < 2.8
    assert 4.5 <= report.peak_ay <= 6.0
    assert weave_run.extras["course_extent_m"] == pytest.approx(450.0, rel=0.1)


def test_weave_low_frequency_spectra_agree(weave_run):
    telemetry = weave_run.telemetry
    agreement = spectral_agreement(telemetry["ay_ref"], telemetry["ay"], telemetry.dt,
                                   f_max=1.0, significance=0.2, tolerance=0.1)
    assert agreement.frequencies.size > 0
    assert agreement.passed, agreement.relative_errors


def test_repeated_dlc_run_is_byte_identical(dlc_run, tmp_path):
    again = app.run_scenario(_load("dlc_emulated", tmp_path))
    assert filecmp.cmp(dlc_run.telemetry_path, again.telemetry_path, shallow=False)


def test_mid_dlc_commands_and_torque_hold_at_a_tenth_of_the_step(tmp_path):
    coarse = app.run_scenario(_load("dlc_emulated", tmp_path, **{"run.duration_s": 2.0}), write=False)
    fine = app.run_scenario(_load("dlc_emulated", tmp_path, **{"run.duration_s": 2.0, "run.dt_s": 0.0001}),
                            write=False)
    a, b = coarse.telemetry, fine.telemetry
    assert a["t"][-1] == pytest.approx(b["t"][-1])
    assert abs(a["delta_f"][-1]) > 0.01
    assert a["delta_f"][-1] == pytest.approx(b["delta_f"][-1], abs=2e-3)
    assert a["delta_r"][-1] == pytest.approx(b["delta_r"][-1], abs=2e-3)
    assert a["tau_hw"][-1] == pytest.approx(b["tau_hw"][-1], rel=0.05, abs=0.05)


def test_proportional_only_loop_drifts_under_rear_misalignment(tmp_path):
    config = _load("misalignment", tmp_path)
    assert config.gains.K_1rI == 0.0
    result = app.run_scenario(config)
    assert result.ticks == 30000
    drift = pure_integrator_drift(result.telemetry)
    assert drift.first_exceed_time is not None
    assert drift.first_exceed_time < 30.0


def test_integral_feedback_holds_lateral_velocity(tmp_path):
    config = _load("misalignment", tmp_path, **{"gains.integral": True})
    result = app.run_scenario(config, write=False)
    drift = pure_integrator_drift(result.telemetry)
    assert drift.max_abs_e_uy < 0.1
    assert drift.first_exceed_time is None


def test_forced_front_saturation_run(tmp_path, record_property):
    config = _load("dlc_saturation", tmp_path)
    result = app.run_scenario(config)
    report = result.report
    assert report.saturation_fraction > 0.0
    assert result.telemetry["N_ref"][-1] >= config.maneuver.end_distance
    # reported for inspection: yaw tracking is expected to hold while lateral acceleration tracking degrades
    record_property("saturation_fraction", report.saturation_fraction)
    record_property("compliance_pct", report.compliance_pct)
    record_property("rms_e_r_dps", report.rms_e_r_dps)
    record_property("rms_e_ay", report.rms_e_ay)


def test_manual_and_emulated_feel_alike(tmp_path):
    manual = app.run_scenario(_load("dlc_manual", tmp_path / "manual"))
    emulated = app.run_scenario(_load("dlc_emulated", tmp_path / "emulated",
                                      **{"maneuver.target_speed_mph": 21.0}))
    assert emulated.telemetry["ux"][0] == pytest.approx(manual.telemetry["ux"][0] / 2.0)

    differences = compare_runs(manual.telemetry, emulated.telemetry, channels=("r", "tau_hw"))
    threshold = yaw_threshold(max(manual.report.peak_r_ref_dps, emulated.report.peak_r_ref_dps))
    assert rad2deg(differences["r"].rms) < threshold

    tau_manual = manual.report.peak_tau_hw
    tau_emulated = emulated.report.peak_tau_hw
    assert abs(tau_manual - tau_emulated) <= 0.25 * max(tau_manual, tau_emulated)
    assert np.isfinite(differences["tau_hw"].max)
