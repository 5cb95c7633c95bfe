import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")

_criteria: list[tuple[int, str, str, float]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call":
        number, title = mark.args
        _criteria.append((number, title, "PASS" if rep.passed else "FAIL", rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict, duration in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number:2d}  {verdict}  {title}  ({duration:.2f} s)")
