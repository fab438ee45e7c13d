import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def record_acceptance(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)
    print(_line(number, title, passed, detail))


def _line(number, title, passed, detail):
    status = "PASS" if passed else "FAIL"
    return f"[{status}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(_line(number, *ACCEPTANCE_RESULTS[number]))


@pytest.fixture
def acceptance():
    return record_acceptance
