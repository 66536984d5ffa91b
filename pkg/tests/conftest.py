import numpy as np
import pytest

_criteria = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.skipped:
        return
    cid, text = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        # Several tests may share one criterion id; it passes only if all do.
        prior = _criteria.get(cid, (text, True))[1]
        _criteria[cid] = (text, prior and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c.lstrip("AC"))):
        text, ok = _criteria[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}  {text}")
