from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from hmlab.exact import quad, sqrt_of

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# 1/(2+sqrt 2) = 1 - sqrt(2)/2
THETA1 = quad(1, Fraction(-1, 2), 2)
GOLDEN = (sqrt_of(5) - 1) / 2
SQRT3M1 = sqrt_of(3) - 1


@pytest.fixture
def theta1():
    return THETA1


# acceptance lines, printed once at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
