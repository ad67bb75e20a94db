import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def four_scored():
    from adeval.detectors import ScoredSet

    return ScoredSet([0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0])
