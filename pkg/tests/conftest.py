import numpy as np
import pytest

from wncsim.gf2 import Gf2Matrix, rank
from wncsim.network import validate

# net1: three sources, four slots, two relayed combinations
NET1_G = Gf2Matrix.from_rows([[1, 0, 1, 1], [0, 1, 0, 1], [0, 0, 1, 0]])
NET1_V = (1, 2, 3, 2)

REP_G = Gf2Matrix.from_rows([[1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 1, 0], [0, 0, 1, 0, 0, 1]])
REP_V = (1, 2, 3, 1, 2, 3)

G1 = Gf2Matrix.from_rows([[1, 0, 0, 1, 1, 0], [0, 1, 0, 0, 1, 1], [0, 0, 1, 1, 0, 1]])
V1 = (1, 2, 3, 1, 2, 3)

G2 = Gf2Matrix.from_rows([[1, 0, 0, 1, 1], [0, 1, 0, 0, 1], [0, 0, 1, 1, 0]])
V2 = (1, 2, 3, 1, 2)


@pytest.fixture
def net1_code():
    return validate(NET1_G, NET1_V)


@pytest.fixture
def g1_code():
    return validate(G1, V1)


@pytest.fixture
def rng():
    return np.random.default_rng(20110328)


def random_full_rank(rng, k, n):
    while True:
        a = rng.integers(0, 2, size=(k, n))
        G = Gf2Matrix.from_array(a)
        if rank(G) == k:
            return G


_acceptance_lines = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
