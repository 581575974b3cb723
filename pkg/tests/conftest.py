import numpy as np
import pytest

from tdseloc.spectral import Grid


@pytest.fixture(scope="session")
def grid():
    return Grid(200.0, 4096)


@pytest.fixture(scope="session")
def small():
    return Grid(64.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(rng, N):
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Criterion label -> list of result lines, echoed in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, None)
    if not log:
        return
    tr = terminalreporter
    tr.section("ACCEPTANCE")
    for label, lines in log.items():
        verdict = "PASS" if all(l.startswith("PASS") for l in lines) else "FAIL"
        tr.write_line(f"{verdict}  {label}")
        for l in lines:
            tr.write_line(f"      {l}")
