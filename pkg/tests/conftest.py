import os

import pytest
from hypothesis import settings

# fixed example sequence by default; --hypothesis-profile=explore draws fresh ones
settings.register_profile("repeatable", derandomize=True)
settings.register_profile("explore", derandomize=False)
settings.load_profile("repeatable")

# criterion number -> [title, passed so far, tests seen]
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")
    os.environ.setdefault("EVT_ORTHO_WORKERS", "1")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, [title, True, 0])
    if call.when == "call":
        entry[2] += 1
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, seen = _CRITERIA[number]
        status = "PASS" if ok and seen else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {title} ({seen} checks)")
