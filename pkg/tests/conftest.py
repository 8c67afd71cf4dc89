import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    prev = _results.get(n, (title, True, 0.0))
    ok = prev[1] and not rep.failed
    _results[n] = (title, ok, prev[2] + (rep.duration if rep.when == "call" else 0.0))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        title, ok, secs = _results[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.2f}s)")
