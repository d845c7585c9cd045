import sys
from pathlib import Path

import pytest

from cep.fixtures import fixture_text
from cep.termsheet import parse_product

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"


@pytest.fixture
def forest():
    return parse_product(fixture_text("forest"))


@pytest.fixture
def wind():
    return parse_product(fixture_text("wind"))


@pytest.fixture
def coal():
    return parse_product(fixture_text("coal"))


@pytest.fixture
def fixture_path(tmp_path):
    def _write(name):
        path = tmp_path / f"{name}.json"
        path.write_text(fixture_text(name), encoding="utf-8")
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
