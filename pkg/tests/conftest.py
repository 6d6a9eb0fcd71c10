import dataclasses

import pytest

from fomcsim.backtest import bundled_path
from fomcsim.ingest import DataTree
from fomcsim.personas import load_personas


@pytest.fixture(scope="session")
def tree():
    return DataTree(bundled_path("fomc_2023_2024"))


@pytest.fixture(scope="session")
def personas():
    return load_personas(bundled_path("personas.json"))


@pytest.fixture
def snapshot(tree):
    return tree.snapshot("2023-02-01")


def with_actual(snapshot, actual):
    return dataclasses.replace(snapshot, actual=actual)


_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[number] = (title, "PASS" if report.outcome == "passed" else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
