# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def tie_blocks(const double[::1] scores, const cnp.int64_t[::1] labels):
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t i, m = 0
    cdef cnp.int64_t pos = 0
    block_scores = np.empty(n, dtype=np.float64)
    tp = np.empty(n, dtype=np.int64)
    fp = np.empty(n, dtype=np.int64)
    cdef double[::1] bs = block_scores
    cdef cnp.int64_t[::1] tpv = tp
    cdef cnp.int64_t[::1] fpv = fp
    for i in range(n):
        pos += labels[i]
        if i == n - 1 or scores[i + 1] != scores[i]:
            bs[m] = scores[i]
            tpv[m] = pos
            fpv[m] = i + 1 - pos
            m += 1
    return block_scores[:m], tp[:m], fp[:m]


cdef inline void _sift_down(double* heap, Py_ssize_t size) nogil:
    # max-heap on heap[0:size], root replaced by caller
    cdef Py_ssize_t i = 0, c
    cdef double tmp
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and heap[c + 1] > heap[c]:
            c += 1
        if heap[c] <= heap[i]:
            break
        tmp = heap[c]
        heap[c] = heap[i]
        heap[i] = tmp
        i = c


cdef inline void _sift_up(double* heap, Py_ssize_t i) nogil:
    cdef Py_ssize_t p
    cdef double tmp
    while i > 0:
        p = (i - 1) // 2
        if heap[p] >= heap[i]:
            break
        tmp = heap[p]
        heap[p] = heap[i]
        heap[i] = tmp
        i = p


def kth_neighbor_distance(const double[:, ::1] train, const double[:, ::1] query, Py_ssize_t k):
    cdef Py_ssize_t n = train.shape[0], m = query.shape[0], d = train.shape[1]
    cdef Py_ssize_t i, j, l, size
    cdef double acc, diff
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] outv = out
    heap_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] heapv = heap_arr
    cdef double* heap = &heapv[0]
    with nogil:
        for i in range(m):
            size = 0
            for j in range(n):
                acc = 0.0
                for l in range(d):
                    diff = query[i, l] - train[j, l]
                    acc = acc + diff * diff
                if size < k:
                    heap[size] = acc
                    _sift_up(heap, size)
                    size += 1
                elif acc < heap[0]:
                    heap[0] = acc
                    _sift_down(heap, size)
            outv[i] = sqrt(heap[0])
    return out
