import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

N_CRITERIA = 10
_acceptance = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    """Record ``(criterion, title, passed, detail)`` for the end-of-run summary."""

    def record(number, title, passed, detail):
        _acceptance[number] = (title, bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number} {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n in _acceptance:
            title, ok, detail = _acceptance[n]
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {title}: {detail}")
        else:
            terminalreporter.write_line(f"[----] {n:>2}. not run (deselected or errored before recording)")
