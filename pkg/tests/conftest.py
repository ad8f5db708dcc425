"""
Pytest configuration and fixtures
"""

import numpy as np
import pytest

from crystalwalk.models.kernel import TransitionTable
from crystalwalk.models.lattice import LatticeKind
from crystalwalk.models.walk import RngSpec

TEST_SEED = 12345


@pytest.fixture
def ice_table() -> TransitionTable:
    """Symmetric ice table, p = 1/5, alpha = 1/2, a = h = 1"""
    return TransitionTable.symmetric(LatticeKind.ICE)


@pytest.fixture
def graphite_table() -> TransitionTable:
    """Symmetric graphite table, p = 1/5, alpha = 1/2, a = h = 1"""
    return TransitionTable.symmetric(LatticeKind.GRAPHITE)


@pytest.fixture
def skewed_ice_table() -> TransitionTable:
    """Ice table with a horizontal drift and a biased vertical share"""
    return TransitionTable(
        kind=LatticeKind.ICE,
        p=0.3,
        alpha=0.7,
        horizontal=[[0.4, 0.2, 0.1], [0.1, 0.35, 0.25]],
        geometry={"a": 1.3, "h": 0.8},
    )


@pytest.fixture
def skewed_graphite_table() -> TransitionTable:
    """Graphite table with distinct rows for every class"""
    return TransitionTable(
        kind=LatticeKind.GRAPHITE,
        p=0.35,
        alpha=0.6,
        horizontal=[
            [[0.3, 0.25, 0.1], [0.2, 0.5, 0.3]],
            [[0.1, 0.15, 0.4], [0.6, 0.1, 0.3]],
        ],
        geometry={"a": 0.9, "h": 1.4},
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for drawing random tables"""
    return np.random.Generator(np.random.Philox(TEST_SEED))


@pytest.fixture
def rng_spec() -> RngSpec:
    return RngSpec(seed=TEST_SEED)
