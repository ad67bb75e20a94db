"""Hot kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports cleanly; setting the
environment variable ``ADEVAL_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the implementation in use.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("ADEVAL_PURE_PYTHON", "") not in ("", "0"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

BACKEND = "cython" if _core is not None else "python"
_impl = _core if _core is not None else _fallback


def tie_blocks(scores, labels):
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    return _impl.tie_blocks(scores, labels)


def kth_neighbor_distance(train, query, k):
    train = np.ascontiguousarray(train, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    return _impl.kth_neighbor_distance(train, query, int(k))


def implementations():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _fallback}
    if _core is not None:
        out["cython"] = _core
    return out
