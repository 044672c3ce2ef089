import math

import numpy as np
import pytest


def trial_division_primes(n):
    """Primes <= n by trial division; slow on purpose, used as an oracle."""
    out = []
    for m in range(2, n + 1):
        r = math.isqrt(m)
        if all(m % p for p in out if p <= r):
            out.append(m)
    return out


@pytest.fixture(autouse=True)
def _mp_precision():
    """mpmath oracles run at 40 digits; restore whatever a test changed."""
    import mpmath

    with mpmath.workdps(40):
        yield


@pytest.fixture(scope="session")
def primes_1e5():
    return np.array(trial_division_primes(10**5), dtype=np.int64)


@pytest.fixture
def store(tmp_path):
    from primebounds.checkpoints import CheckpointStore

    return CheckpointStore(tmp_path / "cp.jsonl")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
