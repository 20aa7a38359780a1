import math
import os

import pytest

from src.control.gains import DEFAULT_ELEMENTS
from src.core import settings
from src.core.errors import ConfigError
from src.core.vehicle import deg2rad, mph_to_mps

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "config")


def test_defaults(make_config, params, gains):
    config = make_config()
    assert config.mode == "emulated"
    assert config.vehicle == params
    assert config.gains == gains
    assert config.matrix_elements == pytest.approx(DEFAULT_ELEMENTS)
    assert config.maneuver.kind == "dlc"
    assert config.maneuver.f == 2.0
    assert config.maneuver.target_speed == pytest.approx(mph_to_mps(30.0))
    assert config.driver.preview_time == 1.0
    assert config.dt == 0.001
    assert config.name == "dlc"
    assert not config.progress


def test_units_are_converted(make_config):
    config = make_config({"vehicle.delta_f_max_deg": 20.0, "controller.rate_limit_dps": 250.0,
                          "maneuver.target_speed_mph": 50.0})
    assert config.vehicle.delta_f_max == pytest.approx(deg2rad(20.0))
    assert config.controller.rate_limit == pytest.approx(deg2rad(250.0))
    assert config.maneuver.target_speed == pytest.approx(mph_to_mps(50.0))


def test_weave_kind_defaults(make_config):
    config = make_config({"maneuver.kind": "weave"})
    assert config.maneuver.f == 3.0
    assert config.maneuver.target_speed == pytest.approx(mph_to_mps(60.0))
    assert config.driver.preview_time == 0.72


def test_unknown_key_is_rejected(make_config):
    with pytest.raises(ConfigError) as e:
        make_config({"vehicle.mass": 1500.0})
    assert e.value.violations == ["vehicle.mass"]
    assert e.value.exit_code == 3


def test_invalid_values_collect_violations(make_config):
    with pytest.raises(ConfigError) as e:
        make_config({"vehicle.m_kg": -1.0, "vehicle.mu": 3.0, "run.dt_s": 0.1})
    joined = " ".join(e.value.violations)
    assert "m must be positive" in joined
    assert "mu" in joined
    assert "run.dt_s" in joined
    with pytest.raises(ConfigError):
        make_config({"vehicle.a_m": "long"})
    with pytest.raises(ConfigError):
        make_config({"gains.K_rsat_Nms": 5000.0})
    with pytest.raises(ConfigError):
        make_config({"mode": "autopilot"})
    with pytest.raises(ConfigError):
        make_config({"maneuver.kind": "slalom"})


def test_manual_mode_forces_unit_scaling(make_config):
    config = make_config({"mode": "manual", "maneuver.f": 2.0})
    assert config.manual
    assert config.maneuver.f == 1.0


def test_integral_switch(make_config):
    config = make_config({"gains.integral": False})
    assert config.gains.K_1rI == 0.0
    assert config.gains.K_2uyI == 0.0
    assert config.gains.K_1r == pytest.approx(18000.0)


def test_output_dir_env_override(make_config, monkeypatch, tmp_path):
    target = str(tmp_path / "elsewhere")
    monkeypatch.setenv(settings.OUTPUT_DIR_ENV, target)
    assert make_config().output_dir == target


def test_hash_ignores_output_placement(make_config, tmp_path):
    a = make_config()
    b = make_config({"run.output_dir": str(tmp_path / "other"), "run.progress": True})
    c = make_config({"run.seed": 1})
    assert a.sha256 == b.sha256
    assert a.sha256 != c.sha256
    assert "run.output_dir" not in a.echo()
    assert a.echo()["run.seed"] == 0


def test_load_yaml_file(tmp_path):
    path = tmp_path / "my_weave.yaml"
    path.write_text("maneuver:\n  kind: weave\n  f: 2.5\nrun:\n  seed: 4\n", encoding="utf-8")
    config = settings.load(str(path), {"run.output_dir": str(tmp_path), "run.progress": False})
    assert config.name == "my_weave"
    assert config.maneuver.kind == "weave"
    assert config.maneuver.f == 2.5
    assert config.seed == 4
    assert config.plant.seed == 4


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        settings.load(str(tmp_path / "missing.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("maneuver: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        settings.load(str(broken))
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("just a string\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        settings.load(str(scalar))


def test_shipped_configs_load(tmp_path):
    for stem in ("dlc_emulated", "dlc_manual", "dlc_saturation", "weave", "straight", "misalignment"):
        config = settings.load(os.path.join(CONFIG_DIR, f"{stem}.yaml"), {"run.output_dir": str(tmp_path)})
        assert config.name == stem
        assert math.isfinite(config.maneuver.end_distance)


def test_help_epilog_lists_every_key():
    epilog = settings.help_epilog()
    for key in settings.CONFIG_KEYS:
        assert key.key in epilog


def test_flatten():
    assert settings.flatten({"a": {"b": 1, "c": {"d": [1, 2]}}, "e": 2}) == {"a.b": 1, "a.c.d": [1, 2], "e": 2}
