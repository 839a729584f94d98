import sys

import pytest
from hypothesis import HealthCheck, settings

from resbisim import fixtures

settings.register_profile("default", max_examples=80, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_addoption(parser):
    parser.addoption("--fuzz-seed", type=int, default=0,
                     help="seed for the randomized acceptance corpus")


@pytest.fixture(scope="session")
def fuzz_seed(request):
    return request.config.getoption("--fuzz-seed")


@pytest.fixture(scope="session")
def fig1():
    return fixtures.load("fig1")


@pytest.fixture(scope="session")
def fig2():
    return fixtures.load("fig2")


@pytest.fixture(scope="session")
def fig3():
    return fixtures.load("fig3")


@pytest.fixture(scope="session")
def fig4():
    return fixtures.load("fig4")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
