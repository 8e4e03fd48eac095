"""
Pytest Configuration File
Shared fixtures and configuration for all tests
"""

import json
import os
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

# Add src directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from linalg_core import RankTolerance
from locality import NeighborhoodStructure
from quantum_state import dicke_state, ghz_state, random_state, w_state


# =============================================================================
# PYTEST CONFIGURATION
# =============================================================================

def pytest_configure(config):
    """Configure pytest"""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
    config.addinivalue_line(
        "markers", "unit: marks tests as unit tests"
    )


def pytest_collection_modifyitems(config, items):
    """Auto-mark Monte Carlo sweeps as slow"""
    for item in items:
        if "sweep" in item.name or "batch" in item.name:
            item.add_marker(pytest.mark.slow)


# =============================================================================
# SHARED FIXTURES
# =============================================================================

@pytest.fixture(scope="session")
def project_root():
    """Get project root directory"""
    return Path(__file__).parent.parent


@pytest.fixture(scope="session")
def default_tol():
    return RankTolerance()


@pytest.fixture(scope="session")
def pairs_structure():
    """{{1,2},{2,3}} on three subsystems"""
    return NeighborhoodStructure.from_lists(3, [[1, 2], [2, 3]])


@pytest.fixture(scope="session")
def triples_structure():
    """{{1,2,3},{2,3,4}} on four subsystems"""
    return NeighborhoodStructure.from_lists(4, [[1, 2, 3], [2, 3, 4]])


@pytest.fixture
def ghz3():
    return ghz_state(3)


@pytest.fixture
def w3():
    return w_state(3)


@pytest.fixture
def dicke42():
    return dicke_state(4, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# =============================================================================
# FACTORY FIXTURES
# =============================================================================

@pytest.fixture
def make_random_state():
    """Factory for seeded random states"""
    def _make(dims, seed=0):
        return random_state(dims, seed)
    return _make


@pytest.fixture
def write_json(tmp_path):
    """Factory writing a dict to a JSON file under tmp_path"""
    def _write(name, data):
        path = tmp_path / name
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2)
        return path
    return _write


@pytest.fixture
def write_yaml(tmp_path):
    """Factory writing a dict to a YAML file under tmp_path"""
    def _write(name, data):
        path = tmp_path / name
        with open(path, 'w', encoding='utf-8') as f:
            yaml.dump(data, f, default_flow_style=False, indent=2)
        return path
    return _write


# =============================================================================
# PARAMETRIZED FIXTURES
# =============================================================================

@pytest.fixture(params=[
    (2, 2, 3),
    (3, 2, 4),
    (4, 2, 5),
    (2, 3, 4),
])
def generic_dqls_dims(request):
    """Tripartite dims where random states are DQLS"""
    return request.param


@pytest.fixture(params=[
    (2, 2, 4),
    (2, 3, 6),
    (3, 3, 9),
])
def nogo_dims(request):
    """Tripartite dims with d_a * d_b <= d_c"""
    return request.param


@pytest.fixture(params=[
    ((2, 2, 2), 2),
    ((3, 2, 3), 3),
    ((4, 2, 4), 4),
    ((2, 2, 3), 1),
    ((3, 2, 4), 1),
    ((4, 2, 5), 1),
    ((3, 2, 5), 4),
    ((2, 2, 5), 4),
    ((3, 2, 7), 9),
])
def central_qubit_case(request):
    """(dims, dim H0) for random states with a qubit in the middle"""
    return request.param
