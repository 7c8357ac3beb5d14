import numpy as np
import pytest

from relcoord.synth import glyph

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Collect one summary line per acceptance criterion."""
    def _report(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def two():
    return glyph("2")


@pytest.fixture(scope="session")
def five():
    return glyph("5")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
