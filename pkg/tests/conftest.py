import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_ACCEPTANCE: dict[tuple[int, str], bool] = {}
_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(?:\[.*\])?$")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = _CRITERION.match(report.nodeid.split("::")[-1])
    if not m or (report.when != "call" and report.passed):
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    _ACCEPTANCE[key] = _ACCEPTANCE.get(key, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {n:>2}  {title:<36} {'PASS' if ok else 'FAIL'}")
