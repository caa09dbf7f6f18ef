import time

import pytest

SUITE_BUDGET_S = 120.0

_session_start = time.perf_counter()
_criteria: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): label a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.kwargs.get("name", item.name)
    _criteria[name] = _criteria.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _session_start
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _criteria.items():
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}")
    budget_ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"[{'PASS' if budget_ok else 'FAIL'}] suite runtime under {SUITE_BUDGET_S:.0f} s "
        f"({elapsed:.1f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    # the runtime budget is part of the acceptance surface
    if _criteria and exitstatus == 0:
        if time.perf_counter() - _session_start >= SUITE_BUDGET_S:
            session.exitstatus = 1
