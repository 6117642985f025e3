import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SESSION = {"start": time.perf_counter(), "criteria": {}}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")
    config.addinivalue_line("markers", "run_last: run after every other test")
    SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # the wall-clock criterion measures the whole session, so it runs last
    last = [it for it in items if it.get_closest_marker("run_last")]
    rest = [it for it in items if not it.get_closest_marker("run_last")]
    items[:] = rest + last


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        SESSION["criteria"][n] = (title, rep.outcome)


def pytest_terminal_summary(terminalreporter):
    crit = SESSION["criteria"]
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(crit):
        title, outcome = crit[n]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {word}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def elapsed() -> float:
    return time.perf_counter() - SESSION["start"]
