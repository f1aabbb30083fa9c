import pytest

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "failed": [], "ran": 0})
    if report.failed:
        entry["failed"].append(item.name)
    elif report.when == "call":
        entry["ran"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"{status} criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f" (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
