from pathlib import Path

import pytest

from polyurn.model import UrnSpec

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


def load(name: str) -> UrnSpec:
    return UrnSpec.from_json(fixture_path(name))


@pytest.fixture
def large():
    return load("large")


@pytest.fixture
def small():
    return load("small")


@pytest.fixture
def classical():
    return load("classical")


@pytest.fixture
def triangular():
    return load("triangular")


# One line per acceptance criterion, printed at the end of the session.
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
