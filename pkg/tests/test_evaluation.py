import math

import numpy as np
import pytest

from src.core.errors import DomainError, EvaluationError
from src.core.vehicle import deg2rad
from src.data.telemetry import COLUMNS, Telemetry
from src.services.evaluation_service import (ThresholdTable, compare_runs, pure_integrator_drift,
                                             steer_dominance, thresholds_from_config, tracking_report,
                                             yaw_threshold)


def _telemetry(n: int = 1000, dt: float = 0.01, **channels) -> Telemetry:
    columns = {name: np.zeros(n) for name in COLUMNS}
    columns["t"] = np.arange(1, n + 1) * dt
    columns["s"] = columns["t"] * 10.0
    for name, values in channels.items():
        columns[name] = np.asarray(values, dtype=float)
    return Telemetry(meta={"schema": "1"}, params={}, columns=columns)


@pytest.mark.parametrize("amplitude, expected", [(20.6, 3.35), (12.8, 2.65), (16.7, 3.00)])
def test_yaw_threshold_table(amplitude, expected):
    assert yaw_threshold(amplitude) == pytest.approx(expected)


def test_yaw_threshold_clamps():
    assert yaw_threshold(0.0) == pytest.approx(2.65)
    assert yaw_threshold(50.0) == pytest.approx(3.35)
    with pytest.raises(DomainError):
        yaw_threshold(-1.0)


def test_threshold_table_extension():
    table = thresholds_from_config([[30.0, 4.0]])
    assert yaw_threshold(25.3, table) == pytest.approx(3.35 + 0.5 * 0.65)
    assert thresholds_from_config(None) == ThresholdTable()
    with pytest.raises(DomainError):
        ThresholdTable(((10.0, 3.0), (5.0, 4.0)))
    with pytest.raises(DomainError):
        ThresholdTable(((10.0, 3.0), (20.0, 2.0)))


def test_tracking_report_fields():
    t = np.arange(1, 1001) * 0.01
    r_ref = deg2rad(20.6) * np.sin(2.0 * np.pi * 0.5 * t)
    # 1 deg/s offset everywhere except the last 30 samples (5 deg/s)
    r = r_ref - deg2rad(1.0)
    r[-30:] = r_ref[-30:] - deg2rad(5.0)
    ay_ref = 4.0 * np.sin(2.0 * np.pi * 0.5 * t)
    telemetry = _telemetry(r_ref=r_ref, r=r, ay_ref=ay_ref, ay=0.9 * ay_ref, ay_seat=1.1 * ay_ref,
                           tau_hw=np.full(1000, -2.5), saturated=np.r_[np.ones(100), np.zeros(900)])
    report = tracking_report(telemetry)
    assert report.n_samples == 1000
    assert report.peak_r_ref_dps == pytest.approx(20.6, rel=1e-3)
    assert report.threshold_dps == pytest.approx(3.35, abs=1e-3)
    assert report.compliance_pct == pytest.approx(97.0)
    assert report.complies
    assert report.peak_ay_seat == pytest.approx(4.4, rel=1e-3)
    assert report.saturation_fraction == pytest.approx(0.1)
    assert report.peak_tau_hw == pytest.approx(2.5)
    assert report.low_band_ratio == pytest.approx(0.9)
    assert report.rms_e_r_dps == pytest.approx(math.sqrt(0.97 * 1.0 + 0.03 * 25.0))
    data = report.to_dict()
    assert data["compliance_pct"] == pytest.approx(97.0)
    assert "statistic" in data
    assert any(line.startswith("threshold compliance") and "PASS" in line for line in report.lines())


def test_tracking_report_needs_samples():
    with pytest.raises(EvaluationError):
        tracking_report(_telemetry(n=0))


def test_compare_run_with_itself():
    telemetry = _telemetry(r=np.sin(np.arange(1000) * 0.01), ay=np.cos(np.arange(1000) * 0.01))
    differences = compare_runs(telemetry, telemetry)
    for diff in differences.values():
        assert diff.rms == 0.0
        assert diff.max == 0.0


def test_compare_uses_path_distance():
    slow = _telemetry(n=2000, dt=0.01)
    slow.columns["s"] = slow["t"] * 5.0
    slow.columns["r"] = 0.01 * slow["s"]
    fast = _telemetry(n=1000, dt=0.01)
    fast.columns["r"] = 0.01 * fast["s"] + 0.2
    differences = compare_runs(slow, fast, channels=("r",))
    assert differences["r"].rms == pytest.approx(0.2)
    assert differences["r"].max == pytest.approx(0.2)


def test_compare_needs_overlap():
    a = _telemetry(n=100)
    b = _telemetry(n=100)
    b.columns["s"] = b["s"] + 1000.0
    with pytest.raises(EvaluationError):
        compare_runs(a, b)


def test_steer_dominance():
    dominance = steer_dominance([0.1, 0.1, -0.1, 0.0], [0.05, -0.2, -0.02, 0.1])
    assert dominance.samples == 3
    assert dominance.same_sign_fraction == pytest.approx(2.0 / 3.0)
    assert dominance.front_larger_fraction == pytest.approx(2.0 / 3.0)
    assert steer_dominance([0.0], [0.0]).samples == 0


def test_steer_dominance_over_yaw_transients():
    delta_f = [0.10, 0.10, 0.02, 0.05]
    delta_r = [0.05, 0.08, 0.04, 0.09]
    r_ref = [0.4, -0.3, 0.1, 0.0]
    dominance = steer_dominance(delta_f, delta_r, r_ref=r_ref)
    assert dominance.samples == 2
    assert dominance.front_larger_fraction == 1.0
    assert steer_dominance(delta_f, delta_r).front_larger_fraction == 0.5
    assert steer_dominance(delta_f, delta_r, r_ref=r_ref, transient_level=1.0).samples == 1
    with pytest.raises(DomainError):
        steer_dominance(delta_f, delta_r, r_ref=r_ref, transient_level=0.0)
    with pytest.raises(EvaluationError):
        steer_dominance(delta_f, delta_r, r_ref=r_ref[:2])


def test_pure_integrator_drift():
    t = np.arange(1, 1001) * 0.01
    telemetry = _telemetry(u_ydes=0.25 * t, uy=0.1 * t, e_uy=0.1 * t)
    drift = pure_integrator_drift(telemetry)
    assert drift.first_exceed_time == pytest.approx(4.01)
    assert drift.max_abs_u_ydes == pytest.approx(2.5)
    assert drift.max_abs_e_uy == pytest.approx(1.0)
    assert pure_integrator_drift(telemetry, limit=10.0).first_exceed_time is None
