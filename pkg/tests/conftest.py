import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def unit_rows(Z):
    return Z / np.linalg.norm(Z, axis=-1, keepdims=True)


def random_states(rng, N, d, real=False):
    Z = rng.normal(size=(N, d))
    if not real:
        Z = Z + 1j * rng.normal(size=(N, d))
    return unit_rows(Z.astype(np.complex128))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
