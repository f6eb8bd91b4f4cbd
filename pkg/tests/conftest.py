"""Shared fixtures and brute-force oracles.

Oracles here recompute expected values by a route independent of the
library code under test (window scans, direct folds, graph walks).
"""

import pytest
from hypothesis import settings

from branchdyn import systems

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def collatz():
    return systems.make_system(systems.collatz())


@pytest.fixture(scope="session")
def five_x_one():
    return systems.make_system(systems.QxPlusD(5, 1))


@pytest.fixture(scope="session")
def swap1():
    # 2-state swap with a single branch: the standing totally-uniqueness
    # counterexample (both states share the constant coding).
    return systems.make_system(
        systems.FiniteTable.make({1: 1, 2: 1}, {1: 2, 2: 1}, k=1)
    )


@pytest.fixture(scope="session")
def swap2():
    # same dynamics, two branches: codings differ at the first symbol.
    return systems.make_system(
        systems.FiniteTable.make({1: 1, 2: 2}, {1: 2, 2: 1}, k=2)
    )


@pytest.fixture(scope="session")
def alphabeta3():
    return systems.make_system(systems.AlphaBeta(3, (2, 4), (1, 5)))


def brute_preimages(sys, x, bound):
    """Scan every y <= bound for f(y) = x; independent of preimages()."""
    out = []
    for y in range(1, bound + 1):
        if sys.apply(y) == x:
            out.append((y, sys.branch_of(y)))
    return out


def preimage_scan_bound(sys, x):
    # any preimage y satisfies y = k*x (division) or a*y + b = x,
    # so y <= max(k*x, x) always covers the search space
    return sys.k * x + 1
