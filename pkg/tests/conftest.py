import numpy as np
import pytest

from meshfree_options import ModelParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def case1() -> ModelParams:
    return ModelParams.test_case_1()


@pytest.fixture(scope="session")
def case2() -> ModelParams:
    return ModelParams.test_case_2()


@pytest.fixture(scope="session")
def case1_points() -> np.ndarray:
    return 8.0 + 0.5 * np.arange(9)


@pytest.fixture(scope="session")
def case2_points() -> np.ndarray:
    return 80.0 + 5.0 * np.arange(9)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
