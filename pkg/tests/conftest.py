import numpy as np
import pytest

from modo.problems import ScQuadraticSpec, make_sc_quadratic


@pytest.fixture(scope="session")
def sc_default():
    return make_sc_quadratic(ScQuadraticSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
