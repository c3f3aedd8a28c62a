import numpy as np
import pytest

from entcool.network import NetworkConfig
from entcool.oscillator import build_system

# Grid-search optima (24 x 24 phase grid) used as fixed working points.
SQL_CFG = NetworkConfig(1.0, 0.0, 0.9, 1.1780972450961724, 0.0)
ENT_CFG = NetworkConfig(0.7, 0.0, 0.9, 1.1780972450961724, 2.748893571891069)
LOSSY_CFG = NetworkConfig(0.5, 0.2, 0.5, 1.3089969389957472, 1.4398966328953218)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sql_sys():
    return build_system(SQL_CFG)


@pytest.fixture(scope="session")
def ent_sys():
    return build_system(ENT_CFG)


@pytest.fixture(scope="session")
def lossy_sys():
    return build_system(LOSSY_CFG)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
