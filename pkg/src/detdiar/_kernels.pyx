# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_kernels_py``.

Results are bit-identical to the Python versions; keep the float operations
in the same order when editing either file.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, INFINITY

cnp.import_array()

cdef enum:
    HARD = 0
    LINEAR = 1


def soft_nms_kernel(starts, ends, scores, groups, tie_rank, int method, double sigma,
                    double iou_threshold, double score_floor, Py_ssize_t max_out):
    cdef double[::1] s = np.ascontiguousarray(starts, dtype=np.float64)
    cdef double[::1] e = np.ascontiguousarray(ends, dtype=np.float64)
    cdef double[::1] cur = np.array(scores, dtype=np.float64, copy=True)
    cdef long long[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef long long[::1] rank = np.ascontiguousarray(tie_rank, dtype=np.int64)
    cdef Py_ssize_t n = cur.shape[0]
    cdef long long[::1] rem = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t nrem = 0, k, i, best, nnew
    cdef double bs, be, inter, iou
    cdef long long bg
    keep = []
    kept_scores = []
    for i in range(n):
        if cur[i] >= score_floor:
            rem[nrem] = i
            nrem += 1
    while nrem > 0 and len(keep) < max_out:
        best = rem[0]
        for k in range(nrem):
            i = rem[k]
            if cur[i] > cur[best] or (cur[i] == cur[best] and rank[i] < rank[best]):
                best = i
        keep.append(best)
        kept_scores.append(cur[best])
        bs = s[best]
        be = e[best]
        bg = g[best]
        nnew = 0
        for k in range(nrem):
            i = rem[k]
            if i == best:
                continue
            if g[i] == bg:
                inter = (be if be < e[i] else e[i]) - (bs if bs > s[i] else s[i])
                if inter <= 0.0:
                    iou = 0.0
                else:
                    iou = inter / ((be - bs) + (e[i] - s[i]) - inter)
                if method == HARD:
                    if iou >= iou_threshold:
                        continue
                elif method == LINEAR:
                    if iou >= iou_threshold:
                        cur[i] = cur[i] * (1.0 - iou)
                else:
                    cur[i] = cur[i] * exp(-(iou * iou) / sigma)
                if cur[i] < score_floor:
                    continue
            rem[nnew] = i
            nnew += 1
        nrem = nnew
    return keep, kept_scores


cdef inline void _recompute(double[:, ::1] D, char[::1] active, double[::1] rowmin,
                            long long[::1] rowarg, Py_ssize_t k, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    cdef double best = INFINITY
    cdef long long arg = -1
    for j in range(k + 1, n):
        if active[j] and (arg == -1 or D[k, j] < best):
            best = D[k, j]
            arg = j
    rowmin[k] = best
    rowarg[k] = arg


def ahc_kernel(dist):
    cdef double[:, ::1] D = np.array(dist, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t m = n - 1 if n > 1 else 0
    merges_arr = np.zeros((m, 2), dtype=np.int64)
    heights_arr = np.zeros(m, dtype=np.float64)
    if n < 2:
        return merges_arr, heights_arr
    cdef long long[:, ::1] merges = merges_arr
    cdef double[::1] heights = heights_arr
    cdef double[::1] size = np.ones(n, dtype=np.float64)
    cdef char[::1] active = np.ones(n, dtype=np.int8)
    cdef double[::1] rowmin = np.full(n, np.inf)
    cdef long long[::1] rowarg = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t step, i, j, k, r
    cdef double na, nb, v, best
    with nogil:
        for k in range(n - 1):
            _recompute(D, active, rowmin, rowarg, k, n)
        for step in range(n - 1):
            i = 0
            best = rowmin[0]
            for r in range(1, n):
                if rowmin[r] < best:
                    best = rowmin[r]
                    i = r
            j = rowarg[i]
            merges[step, 0] = i
            merges[step, 1] = j
            heights[step] = best
            na = size[i]
            nb = size[j]
            for k in range(n):
                v = (na * D[i, k] + nb * D[j, k]) / (na + nb)
                D[i, k] = v
            for k in range(n):
                D[k, i] = D[i, k]
            size[i] = na + nb
            active[j] = 0
            rowmin[j] = INFINITY
            rowarg[j] = -1
            _recompute(D, active, rowmin, rowarg, i, n)
            for k in range(n):
                if not active[k] or k == i:
                    continue
                if rowarg[k] == i or rowarg[k] == j:
                    _recompute(D, active, rowmin, rowarg, k, n)
                elif k < i and (D[k, i] < rowmin[k] or (D[k, i] == rowmin[k] and i < rowarg[k])):
                    rowmin[k] = D[k, i]
                    rowarg[k] = i
    return merges_arr, heights_arr
