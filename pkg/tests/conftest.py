import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(label): acceptance check that reports one [PASS]/[FAIL] line",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        status = "PASS" if report.passed else "FAIL"
        report.criterion_line = f"[{status}] {marker.args[0]}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = set()
    for reports in terminalreporter.stats.values():
        for rep in reports:
            line = getattr(rep, "criterion_line", None)
            if line:
                lines.add(line)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("] ", 1)[1]):
            terminalreporter.write_line(line)
