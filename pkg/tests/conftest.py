import math

import numpy as np
import pytest

from acca import make_rng


def wrap_oracle(x: float) -> float:
    """Plain-Python canonical wrap used as an independent reference."""
    r = x - 2 * math.pi * math.floor((x + math.pi) / (2 * math.pi))
    if r >= math.pi:
        r -= 2 * math.pi
    if r < -math.pi:
        r += 2 * math.pi
    return r


def sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def circ_close(a, b, tol=1e-12) -> bool:
    """Equal modulo 2*pi up to ``tol``."""
    d = (np.asarray(a) - np.asarray(b) + math.pi) % (2 * math.pi) - math.pi
    return bool(np.all(np.abs(d) <= tol))


@pytest.fixture
def rng():
    return make_rng(12345)


_CRITERIA: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, name, passed, detail)``."""

    def record(number: int, name: str, passed: bool, detail: str) -> bool:
        _CRITERIA.append((number, name, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_CRITERIA):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
