"""Collects per-criterion outcomes of the acceptance suite and prints a summary."""

from collections import OrderedDict

import pytest

_OUTCOMES: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _OUTCOMES.setdefault(number, {"title": title, "failed": [], "ran": 0})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["ran"] += 1
        if not report.passed:
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        entry = _OUTCOMES[number]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        line = f"criterion {number}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
