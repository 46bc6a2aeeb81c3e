import sys

import pytest

from pu_oscillator.core import OscillatorParams, degenerate_params


@pytest.fixture
def params():
    return OscillatorParams(m=1.0, omega=1.0, lam=0.15, hbar=1.0)


@pytest.fixture
def deg_params():
    return degenerate_params()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
