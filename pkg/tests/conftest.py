from __future__ import annotations

import warnings

import pytest
from hypothesis import HealthCheck, settings

from qlap.scaling import ScalingWarning

settings.register_profile("qlap", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qlap")

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion.

    The test calls ``criterion(label, measured)`` once it has computed its
    numbers; the line is marked PASS only if the test body then completes.
    """
    state = {}

    def record(label: str, measured: str) -> None:
        state["label"], state["measured"] = label, measured

    yield record
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    label = state.get("label", request.node.name)
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {state.get('measured', 'no measurement')}"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_scaling():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScalingWarning)
        yield
