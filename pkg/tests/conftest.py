from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from dmtl.dataset import Dataset
from dmtl.syntax import parse_program

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ex_program():
    return parse_program((DATA / "example.dmtl").read_text())


@pytest.fixture
def ex_data():
    return Dataset.parse((DATA / "example.data").read_text())


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one line per acceptance criterion; printed in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
