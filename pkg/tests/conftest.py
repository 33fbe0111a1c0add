import random

import numpy as np
import pytest

from blockbloom.selftest import random_config

_criteria: dict[str, list[tuple[str, str]]] = {}
_details: dict[str, list[str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = str(marker.args[0])
        _criteria.setdefault(number, []).append((item.name, report.outcome))
        for key, value in report.user_properties:
            if key == "detail":
                _details.setdefault(number, []).append(value)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        results = _criteria[number]
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += "  (" + ", ".join(failed) + ")"
        terminalreporter.write_line(line)
        for detail in _details.get(number, []):
            terminalreporter.write_line("    " + detail.split("  ", 1)[-1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_configs():
    r = random.Random(7)
    return [random_config(r) for _ in range(15)]
