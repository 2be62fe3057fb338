import numpy as np
import pytest

from spunpearls.io import build_necklace, load_config
from spunpearls.necklace import load_trefoil_table, spin_necklace, toy_ring, validate_spun
from spunpearls.orbit import generators_from_necklace


@pytest.fixture(scope="session")
def trefoil_semi():
    return load_trefoil_table()


@pytest.fixture(scope="session")
def trefoil(trefoil_semi):
    sn = spin_necklace(trefoil_semi)
    validate_spun(sn)
    return sn


@pytest.fixture(scope="session")
def trefoil_gens(trefoil):
    return generators_from_necklace(trefoil)


@pytest.fixture(scope="session")
def ring():
    return toy_ring()


@pytest.fixture(scope="session")
def ring_gens(ring):
    return generators_from_necklace(ring)


@pytest.fixture(scope="session")
def domino():
    sn = build_necklace(load_config("domino")[0])
    validate_spun(sn)
    return sn


@pytest.fixture(scope="session")
def domino_gens(domino):
    return generators_from_necklace(domino)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
