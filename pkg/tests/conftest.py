import os
import sys

import numpy as np
import pytest

os.environ.setdefault("MPLBACKEND", "Agg")
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from lib.ising import CutGraph, IsingInstance, gen_random_dense, maxcut_to_ising  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run benchmark-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: benchmark-scale test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def triangle():
    return CutGraph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 1)), label="triangle")


@pytest.fixture
def triangle_instance(triangle):
    return maxcut_to_ising(triangle)


@pytest.fixture
def pair_instance():
    return IsingInstance(np.array([[0.0, 1.0], [1.0, 0.0]]), label="pair")


@pytest.fixture
def dense10():
    return gen_random_dense(10, 3)


@pytest.fixture
def dense50():
    return gen_random_dense(50, 11)
