import pytest

_RESULTS: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _RESULTS.append((name, "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _RESULTS:
        terminalreporter.write_line(f"{status}  {name}")
    passed = sum(s == "PASS" for _, s in _RESULTS)
    terminalreporter.write_line(f"{passed}/{len(_RESULTS)} criteria passed")
