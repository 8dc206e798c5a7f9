import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from region import Region  # noqa: E402


@pytest.fixture(scope='module')
def segment():
    return Region.segment(0, 1, 0.05)


@pytest.fixture(scope='module')
def disk():
    return Region.disk(1.0, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
