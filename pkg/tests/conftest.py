import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sgfl import Graph, LaplacianKind, build_laplacian, generate_geometric_graph


@pytest.fixture(scope="session")
def k3():
    """Triangle with unit weights, always-on edges."""
    return Graph(3, [0, 1, 0], [1, 2, 2], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0])


@pytest.fixture(scope="session")
def p2():
    """Single-edge path."""
    return Graph(2, [0], [1], [1.0], [1.0])


@pytest.fixture(scope="session")
def path4():
    """Four-node path with mixed weights and probabilities."""
    return Graph(4, [0, 1, 2], [1, 2, 3], [1.0, 2.0, 0.5], [0.3, 0.5, 0.8])


@pytest.fixture(scope="session")
def geo20():
    """Connected 20-node geometric graph used across module tests."""
    g = generate_geometric_graph(20, 0.3, rng_seed=0)
    assert g.connected
    return g


@pytest.fixture(scope="session")
def geo100():
    g = generate_geometric_graph(100, 0.3, rng_seed=1)
    assert g.connected
    return g
