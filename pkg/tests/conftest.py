import pytest

from chiralsqueeze.model import EffectiveParams

ACCEPTANCE_LINES = []


@pytest.fixture
def reference():
    return EffectiveParams(G_a=2.5, G_b=0.0, epsilon=0.95, theta=0.0, kappa_0=0.05, kappa_ex=2.5, gamma_m=1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
