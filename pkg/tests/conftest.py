import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("fpkhom", max_examples=40, deadline=None)
settings.load_profile("fpkhom")


@pytest.fixture(scope="session")
def ref_a():
    from fpkhom.oracle import reference_solution
    return reference_solution("setting_a_paper")


@pytest.fixture(scope="session")
def ref_b():
    from fpkhom.oracle import reference_solution
    return reference_solution("setting_b_paper")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
