import numpy as np
import pytest
from hypothesis import settings

from psido.grid import make_grid

settings.register_profile("psido", max_examples=60, deadline=None)
settings.load_profile("psido")


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(8.0, 128)


@pytest.fixture(scope="session")
def grid_mid():
    return make_grid(8.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
