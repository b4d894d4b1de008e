from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def register_page():
    from tabkg.pagexml import read_page

    return read_page(FIXTURES / "register.xml")


@pytest.fixture
def person_schema():
    from tabkg.extract import load_schema

    return load_schema(FIXTURES / "person_schema.yaml")


@pytest.fixture
def ex_ns():
    from tabkg.kg import load_namespaces

    return load_namespaces(FIXTURES / "namespaces.yaml")


# -- acceptance summary: one PASS/FAIL line per criterion ------------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when == "teardown":
        return
    number, title = marker.args
    if report.when == "setup" and report.passed:
        return
    passed = report.passed and _criteria.get(number, (title, True))[1]
    _criteria[number] = (title, passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}")
