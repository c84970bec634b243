import sys

import pytest

from causumx import Params, generate_synthetic, synthetic_dag, synthetic_query
from causumx.tabular import Dataset


@pytest.fixture
def small_synth():
    d = generate_synthetic(1000, 3, 2, seed=0)
    return d, synthetic_query(), synthetic_dag(2), ["G1", "G2", "G3"]


@pytest.fixture
def so_like():
    """Tiny developer-salary style table: Country -> Continent is an FD."""
    rows = {
        "Country": ["US", "US", "US", "DE", "DE", "FR", "FR", "IN", "IN", "IN"],
        "Continent": ["NA", "NA", "NA", "EU", "EU", "EU", "EU", "AS", "AS", "AS"],
        "Role": ["dev", "mgr", "dev", "dev", "mgr", "dev", "dev", "mgr", "dev", "dev"],
        "Salary": [100, 150, 110, 70, 90, 60, 65, 40, 20, 25],
    }
    return Dataset.from_columns(rows)


@pytest.fixture
def params():
    return Params()



def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
