import sys
from pathlib import Path

import numpy as np
import pytest

# Add root to path
sys.path.insert(0, str(Path(__file__).parent.parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running experiment run")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def shapley_ring():
    from games.catalog import make_shapley

    return make_shapley({"kind": "ring", "n": 5}, 0.2)


@pytest.fixture
def two_agent_identity():
    """Two agents, one edge, both matrices the 2x2 identity."""
    from games.network_game import Edge, NetworkGame

    return NetworkGame(2, (2, 2), [Edge(0, 1, np.eye(2), np.eye(2))], name="identity_pair")


@pytest.fixture
def random_ring():
    from games.catalog import make_random_game

    return make_random_game({"kind": "ring", "n": 3}, num_actions=3, seed=7)


@pytest.fixture
def write_json(tmp_path):
    """Write a payload as JSON under tmp_path and return the path."""
    import json

    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload, indent=2))
        return path

    return _write
