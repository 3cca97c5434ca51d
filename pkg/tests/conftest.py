from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: list[tuple[str, str]] = []


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.append((marker.args[0], "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _criteria:
        terminalreporter.write_line(f"[{status}] {label}")
