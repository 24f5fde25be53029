import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_acceptance = []


def random_density(rng, dim=4, rank=None):
    rank = rank or dim
    X = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    M = X @ X.conj().T
    return M / np.trace(M).real


def random_hermitian(rng, dim):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return X + X.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}  ({duration:.2f}s)")
