import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

from vsrobust import GraphInstance, SHORTEST_PATH, SelectionInstance, WeightFunction


@pytest.fixture
def two_parallel():
    """The running micro-example: two parallel s-t edges with costs (4, 5)."""
    return GraphInstance(num_nodes=2, tails=np.array([0, 0]),
                         heads=np.array([1, 1]),
                         nominal=np.array([4.0, 5.0]),
                         kind=SHORTEST_PATH, s=0, t=1)


@pytest.fixture
def k3_unit():
    from vsrobust import SPANNING_TREE
    return GraphInstance(num_nodes=3, tails=np.array([0, 0, 1]),
                         heads=np.array([1, 2, 2]), nominal=np.ones(3),
                         kind=SPANNING_TREE)


@pytest.fixture
def unit_weight():
    return WeightFunction.constant(0.0, 1.0)


@pytest.fixture
def small_selection():
    return SelectionInstance(n=4, p=2, nominal=np.array([3.0, 1.0, 4.0, 1.0]))
