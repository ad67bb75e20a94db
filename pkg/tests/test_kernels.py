import numpy as np
import pytest

from adeval import _kernels

IMPLS = _kernels.implementations()


def test_backend_selected():
    assert _kernels.BACKEND in IMPLS


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_tie_blocks(name):
    scores = np.array([5.0, 5.0, 4.0, 3.0, 3.0, 3.0, 1.0])
    labels = np.array([1, 0, 1, 0, 1, 1, 0], dtype=np.int64)
    bs, tp, fp = IMPLS[name].tie_blocks(scores, labels)
    assert bs.tolist() == [5.0, 4.0, 3.0, 1.0]
    assert tp.tolist() == [1, 2, 4, 4]
    assert fp.tolist() == [1, 1, 2, 3]


@pytest.mark.parametrize("name", sorted(IMPLS))
def test_tie_blocks_empty(name):
    bs, tp, fp = IMPLS[name].tie_blocks(np.empty(0), np.empty(0, dtype=np.int64))
    assert bs.size == tp.size == fp.size == 0


def test_backends_agree_exactly(rng):
    if len(IMPLS) < 2:
        pytest.skip("compiled core not built")
    py, cy = IMPLS["python"], IMPLS["cython"]
    for _ in range(20):
        n = int(rng.integers(1, 400))
        s = -np.sort(-rng.integers(0, 30, n).astype(float))
        y = rng.integers(0, 2, n).astype(np.int64)
        for a, b in zip(py.tie_blocks(s, y), cy.tie_blocks(s, y)):
            assert np.array_equal(a, b)
        train = np.ascontiguousarray(rng.normal(size=(int(rng.integers(5, 200)), 3)))
        query = np.ascontiguousarray(rng.normal(size=(int(rng.integers(1, 50)), 3)))
        k = int(rng.integers(1, 5))
        assert np.array_equal(py.kth_neighbor_distance(train, query, k), cy.kth_neighbor_distance(train, query, k))
