import pytest
import sys
import os

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.models import (HyperParams, KernelSpec, LossFamily, LossSpec, ProximityFamily,
                             ProximitySpec)
from src.core.rkhs import KernelExpansion
from src.network.topology import path


@pytest.fixture
def rng():
    """Seeded generator shared by randomized tests"""
    return np.random.default_rng(1234)


@pytest.fixture
def unit_spec():
    """Gaussian kernel with bandwidth 1"""
    return KernelSpec(bandwidth=1.0)


@pytest.fixture
def squared_loss():
    return LossSpec(family=LossFamily.SQUARED_ERROR)


@pytest.fixture
def huber_loss():
    return LossSpec(family=LossFamily.HUBER, threshold=1.0)


@pytest.fixture
def absolute_prox():
    return ProximitySpec(family=ProximityFamily.ABSOLUTE_DIFFERENCE)


@pytest.fixture
def squared_prox():
    return ProximitySpec(family=ProximityFamily.SQUARED_DIFFERENCE)


@pytest.fixture
def small_hp():
    """Step settings for short hand-checkable runs, no compression"""
    return HyperParams(eta=0.1, lam=1e-3, delta=0.0, epsilon=0.0, radius_rb=100.0)


@pytest.fixture
def make_expansion(unit_spec):
    """Factory for random expansions: make_expansion(M, p=1, seed=0)"""
    def factory(M, p=1, seed=0, spec=None):
        gen = np.random.default_rng(seed)
        return KernelExpansion(spec or unit_spec, gen.uniform(-2, 2, size=(M, p)), gen.normal(size=M))
    return factory


@pytest.fixture
def path_topology():
    """Path graph 0 - 1 - 2 with zero tolerances"""
    return path(3)


@pytest.fixture
def node_csv(tmp_path):
    """Writes CSV text to a temporary file and returns its path"""
    def factory(text, name="nodes.csv"):
        file = tmp_path / name
        file.write_text(text, encoding="utf-8")
        return str(file)
    return factory
