import functools

import pytest

from reducedbp import AnalyticModel, binary_law, build_heavy_tail

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def heavy(beta: float):
    return build_heavy_tail(beta)


@functools.lru_cache(maxsize=None)
def model(beta: float):
    return AnalyticModel(heavy(beta))


@functools.lru_cache(maxsize=None)
def binary_model():
    return AnalyticModel(binary_law())


@pytest.fixture(scope="session")
def heavy1():
    return heavy(1.0)


@pytest.fixture(scope="session")
def model1():
    return model(1.0)


@pytest.fixture(scope="session")
def bmodel():
    return binary_model()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
