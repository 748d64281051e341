import pytest

import _report
from _oracles import REFERENCE_GROWTH, REFERENCE_Q, REFERENCE_S_IN
from lateral_chemostat import ChemostatConfig, DesignSpec


@pytest.fixture
def monod():
    return REFERENCE_GROWTH


@pytest.fixture
def reference_config():
    """Two equal tanks of 0.6 with d = 1: positive steady state, washout unstable."""
    return ChemostatConfig(0.6, 0.6, REFERENCE_Q, REFERENCE_S_IN, 1.0, REFERENCE_GROWTH)


@pytest.fixture
def reference_spec():
    return DesignSpec(REFERENCE_Q, REFERENCE_S_IN, 5.9, REFERENCE_GROWTH)


def pytest_terminal_summary(terminalreporter):
    if _report.LINES:
        terminalreporter.section("acceptance criteria")
        _report.emit(terminalreporter.write_line)
