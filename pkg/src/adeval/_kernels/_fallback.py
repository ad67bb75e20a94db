"""Pure numpy implementations of the hot kernels.

Selected when the compiled ``_core`` extension is unavailable or when
``ADEVAL_PURE_PYTHON=1`` is set. Results must match ``_core`` exactly.
"""
import numpy as np


def tie_blocks(scores, labels):
    """Cumulative confusion counts at the end of each equal-score block.

    Parameters
    ----------
    scores : ndarray of float64, sorted in descending order
    labels : ndarray of int64 with values in {0, 1}, aligned with ``scores``

    Returns
    -------
    block_scores : ndarray of float64
        One entry per distinct score, descending.
    tp : ndarray of int64
        Number of positives with score >= block score.
    fp : ndarray of int64
        Number of negatives with score >= block score.
    """
    n = scores.shape[0]
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return np.empty(0, dtype=np.float64), empty, empty.copy()
    ends = np.flatnonzero(np.diff(scores)) if n > 1 else np.empty(0, dtype=np.int64)
    ends = np.append(ends, n - 1)
    pos = np.cumsum(labels, dtype=np.int64)
    tp = pos[ends]
    fp = (ends + 1) - tp
    return scores[ends].astype(np.float64), tp, fp


def kth_neighbor_distance(train, query, k, chunk=512):
    """Euclidean distance from every query row to its k-th nearest train row."""
    out = np.empty(query.shape[0], dtype=np.float64)
    for start in range(0, query.shape[0], chunk):
        q = query[start:start + chunk]
        # accumulate feature by feature, in the same order as the compiled loop
        d2 = np.zeros((q.shape[0], train.shape[0]))
        for j in range(train.shape[1]):
            diff = q[:, j, None] - train[None, :, j]
            d2 += diff * diff
        out[start:start + chunk] = np.partition(d2, k - 1, axis=1)[:, k - 1]
    return np.sqrt(out)
