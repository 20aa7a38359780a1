import math

import numpy as np
import pytest

from src.core.errors import ConfigError
from src.core.vehicle import mph_to_mps
from src.scenario.maneuver import (Maneuver, build_maneuver, gate_errors, lateral_offset, path_s,
                                   preview_point)


def test_dlc_layout():
    dlc = build_maneuver("dlc")
    assert dlc.course_length == pytest.approx(61.0)
    assert dlc.end_distance == pytest.approx(71.0)
    assert dlc.plant_speed == pytest.approx(mph_to_mps(15.0))
    assert dlc.target_offset(0.0) == 0.0
    assert dlc.target_offset(12.0) == 0.0
    assert dlc.target_offset(30.0) == pytest.approx(3.5)
    assert dlc.target_offset(61.0) == 0.0
    # halfway through the lane change
    assert dlc.target_offset(12.0 + 13.5 / 2) == pytest.approx(1.75)


def test_dlc_offset_is_continuous():
    dlc = build_maneuver("dlc")
    s = np.linspace(0.0, 70.0, 7001)
    offsets = dlc.target_offsets(s)
    assert np.max(np.abs(np.diff(offsets))) < 0.01
    assert offsets.min() >= 0.0
    assert offsets.max() == pytest.approx(3.5)


def test_weave_defaults():
    weave = build_maneuver("weave")
    assert weave.course_length == pytest.approx(450.0)
    assert weave.target_speed == pytest.approx(mph_to_mps(60.0))
    assert weave.f == 3.0
    assert weave.target_offset(35.0 + 95.0 / 2) == pytest.approx(3.5)
    assert weave.target_offset(35.0 + 95.0) == pytest.approx(0.0, abs=1e-12)
    assert weave.gates() == []


def test_straight_has_no_offset():
    straight = build_maneuver("straight", {"straight_length": 250.0})
    assert straight.course_length == 250.0
    assert all(straight.target_offset(s) == 0.0 for s in (0.0, 10.0, 249.0, 1000.0))


def test_build_maneuver_rejects_unknowns():
    with pytest.raises(ConfigError):
        build_maneuver("slalom")
    with pytest.raises(ConfigError):
        build_maneuver("dlc", {"cones": 12})
    with pytest.raises(ConfigError):
        build_maneuver("dlc", {"f": 0.5})
    with pytest.raises(ConfigError):
        Maneuver(sections=(1.0, 2.0))


def test_build_maneuver_sections_override():
    dlc = build_maneuver("dlc", {"sections": [10, 10, 10, 10, 10]})
    assert dlc.sections == (10.0, 10.0, 10.0, 10.0, 10.0)
    assert dlc.course_length == 50.0


def test_path_coordinates():
    assert path_s(-2.0, 40.0) == 40.0
    assert lateral_offset(-2.0, 40.0) == 2.0
    s, offset = preview_point(0.0, 10.0, math.pi / 2, 5.0)
    assert s == pytest.approx(10.0)
    assert offset == pytest.approx(5.0)


def test_gate_errors():
    dlc = build_maneuver("dlc")
    s = np.linspace(0.0, 71.0, 711)
    errors = gate_errors(s, dlc.target_offsets(s) + 0.2, dlc)
    assert [gate.offset for gate, _ in errors] == [0.0, 3.5, 0.0]
    for _, error in errors:
        assert error == pytest.approx(0.2, abs=1e-9)
    # gates outside the logged range are skipped
    assert len(gate_errors(s[:100], np.zeros(100), dlc)) == 1
