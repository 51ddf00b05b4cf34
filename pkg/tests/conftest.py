import pytest


_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "seconds": 0.0, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
        entry["seconds"] += rep.duration
    if rep.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        verdict = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(
            f"{verdict}  criterion {number}: {e['title']}  ({e['tests']} tests, {e['seconds']:.1f} s)")
