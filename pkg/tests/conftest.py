import warnings

import pytest

from jcsim.dynamics import CoverageWarning


@pytest.fixture(autouse=True)
def _quiet_coverage():
    # many small test grids are deliberately narrower than the coverage rule
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoverageWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    from tests import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
