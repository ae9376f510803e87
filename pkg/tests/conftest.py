from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fronttrack.scenario import load_scenarios
from fronttrack.systems import make_system

ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = ROOT / "scenarios"

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def scenarios():
    return {sc.name: sc for sc in load_scenarios(SCENARIO_DIR)}


@pytest.fixture(scope="session")
def psys():
    return make_system("p-system", gamma=1.4, characteristic_family=1)


@pytest.fixture(scope="session")
def linear():
    return make_system("linear")


@pytest.fixture(scope="session")
def burgers():
    return make_system("burgers")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
