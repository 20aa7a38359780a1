import pytest

from src.control.gains import default_gains
from src.core import settings
from src.core.vehicle import DriverInputs, default_params
from src.models.reference_model import ReferenceModel, ReferenceState
from src.scenario.driver import DriverModel, DriverState, driver_step
from src.scenario.maneuver import build_maneuver

DLC_DT = 0.001


@pytest.fixture
def params():
    return default_params()


@pytest.fixture
def gains(params):
    return default_gains(params)


@pytest.fixture
def make_config(tmp_path):
    """Scenario config from dotted-key overrides; outputs go to tmp_path, no progress bar."""
    def _make(overrides=None, name=""):
        flat = {"run.output_dir": str(tmp_path), "run.progress": False}
        flat.update(overrides or {})
        return settings.from_mapping({}, flat, name)
    return _make


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv(settings.OUTPUT_DIR_ENV, raising=False)


@pytest.fixture(scope="module")
def dlc_reference_run():
    """Reference vehicle driven through the default DLC at a constant plant speed.

    Returns the hand-wheel inputs applied at each tick and the state after each tick.
    """
    maneuver = build_maneuver("dlc")
    model = DriverModel()
    reference = ReferenceModel(default_params(), maneuver.f, DLC_DT,
                               initial=ReferenceState(ux=maneuver.target_speed))
    driver = DriverState()
    inputs, states = [], []
    while reference.state.N < maneuver.course_length:
        command, driver = driver_step(reference.state, maneuver, model, DLC_DT, driver)
        command = DriverInputs(delta_hw=command.delta_hw)
        inputs.append(command)
        states.append(reference.step(command, maneuver.plant_speed))
    return inputs, states
