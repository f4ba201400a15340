"""Collects the outcome of each acceptance criterion and prints one line per criterion."""

import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    report = outcome.get_result()
    number, name = mark.args
    if report.when == "call" or report.failed:
        status = "FAIL" if report.failed or _results.get(number, (name, "PASS"))[1] == "FAIL" else "PASS"
        _results[number] = (name, status)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        name, status = _results[number]
        terminalreporter.write_line(f"criterion {number:>2} {status}: {name}")
