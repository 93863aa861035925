import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(acceptance_log.RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
