import pytest
from hypothesis import HealthCheck, settings

from migo.analysis import reachable_states
from migo.game import get_game
from migo.oracle import get_oracle

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def ox():
    return get_game("ox")


@pytest.fixture(scope="session")
def hex3():
    return get_game("hexapawn3")


@pytest.fixture(scope="session")
def hex4():
    return get_game("hexapawn4")


@pytest.fixture(scope="session")
def ox_oracle():
    return get_oracle("ox")


@pytest.fixture(scope="session")
def hex3_oracle():
    return get_oracle("hexapawn3")


@pytest.fixture(scope="session")
def hex4_oracle():
    return get_oracle("hexapawn4")


@pytest.fixture(scope="session")
def ox_states(ox):
    return reachable_states(ox)


@pytest.fixture(scope="session")
def hex3_states(hex3):
    return reachable_states(hex3)
