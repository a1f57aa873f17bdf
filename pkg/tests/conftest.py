import numpy as np
import pytest
from calderon.data.step_functions import StepFunction
from calderon.utils.data import write_json as dump_json
from calderon.utils.linalg import ginibre, gue

SEEDS = [0, 1, 2, 3, 4]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def indicator():
    """χ_(0,1]."""
    return StepFunction.indicator(0.0, 1.0)


@pytest.fixture
def hermitian_pair(rng):
    return gue(rng, 8), gue(rng, 8)


@pytest.fixture
def random_matrix(rng):
    return ginibre(rng, 8)


@pytest.fixture
def write_json(tmp_path):
    """Writes a JSON payload under tmp_path and returns its path as a string."""

    def _write(name, payload):
        path = tmp_path / name
        dump_json(payload, path)
        return str(path)

    return _write
