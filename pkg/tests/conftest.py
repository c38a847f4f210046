import pytest

from dynspec.config import default_config, minimal_config
from dynspec.protocol import Protocol


@pytest.fixture(scope="session")
def minimal():
    return Protocol(minimal_config())


@pytest.fixture(scope="session")
def full_scale():
    return Protocol(default_config())


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, report_lines
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in report_lines():
            terminalreporter.write_line(line)
