"""Shared fixtures and the acceptance-line reporter."""

import numpy as np
import pytest

import ralearn as ra

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """Record one PASS/FAIL line per acceptance criterion.

    The line is printed immediately (visible with -s and on failure) and
    replayed in the terminal summary so a plain ``pytest -v`` run always
    shows every verdict.
    """

    def _report(num: int, ok: bool, detail: str) -> bool:
        line = "CRITERION %02d %s: %s" % (num, "PASS" if ok else "FAIL", detail)
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def thresholds8():
    return ra.thresholds(8)


@pytest.fixture
def uniform8(thresholds8):
    # target h5 is index 4
    return ra.DataModel.realizable(thresholds8, 4)


@pytest.fixture
def counters():
    return ra.SampleCounters()


def rng(seed=0):
    return np.random.default_rng(seed)
