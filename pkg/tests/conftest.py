"""One PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

_RESULTS: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _RESULTS.setdefault(number, {"title": title, "failed": [], "ran": 0})
    if rep.when == "call" or rep.failed:
        entry["ran"] += rep.when == "call"
        if rep.failed:
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        status = "FAIL" if e["failed"] or not e["ran"] else "PASS"
        extra = f"  ({', '.join(e['failed'])})" if e["failed"] else ""
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {e['title']}{extra}")
