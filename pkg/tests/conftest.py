import numpy as np
import pytest

from edgepost.model import Dataset

_ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_dataset(rng, n, m, r):
    records = rng.integers(0, r, size=(m, n))
    return Dataset(tuple(f"x{i}" for i in range(n)), [r] * n, records)


def random_log_table(rng, n, zero_frac=0.2):
    """Random log-weights of length 2**n with some exact zeros."""
    t = rng.normal(scale=3.0, size=1 << n)
    t[rng.random(1 << n) < zero_frac] = -np.inf
    return t


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
