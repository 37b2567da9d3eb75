import numpy as np
import pytest

from lvsynth.frame import compute_frame
from lvsynth.phantom import make_ellipsoid_phantom


@pytest.fixture(scope="session")
def phantom64():
    return make_ellipsoid_phantom(dims=(64, 64, 64))


@pytest.fixture(scope="session")
def frame64(phantom64):
    return compute_frame(phantom64[1])


@pytest.fixture(scope="session")
def phantom32():
    return make_ellipsoid_phantom(dims=(32, 32, 32), semi_axes=(8.0, 8.0, 13.0), texture_period=12.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in ACCEPTANCE:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name} ({duration:.2f}s)")
