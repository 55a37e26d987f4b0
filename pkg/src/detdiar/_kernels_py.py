"""Pure-Python reference kernels.

These must stay numerically identical to ``_kernels.pyx``: same float
operations in the same order, same tie-breaking.
"""

from __future__ import annotations

import math

import numpy as np

HARD, LINEAR, GAUSSIAN = 0, 1, 2


def soft_nms_kernel(starts, ends, scores, groups, tie_rank, method, sigma, iou_threshold,
                    score_floor, max_out):
    """Greedy (soft) suppression.

    Returns ``(kept_indices, kept_scores)`` in selection order. Ties on score
    go to the smaller ``tie_rank``.
    """
    starts = [float(x) for x in starts]
    ends = [float(x) for x in ends]
    cur = [float(x) for x in scores]
    groups = [int(x) for x in groups]
    tie_rank = [int(x) for x in tie_rank]
    remaining = [i for i in range(len(cur)) if cur[i] >= score_floor]
    keep: list[int] = []
    kept_scores: list[float] = []
    while remaining and len(keep) < max_out:
        best = remaining[0]
        for i in remaining:
            if cur[i] > cur[best] or (cur[i] == cur[best] and tie_rank[i] < tie_rank[best]):
                best = i
        keep.append(best)
        kept_scores.append(cur[best])
        bs, be, bg = starts[best], ends[best], groups[best]
        survivors = []
        for i in remaining:
            if i == best:
                continue
            if groups[i] == bg:
                inter = min(be, ends[i]) - max(bs, starts[i])
                if inter <= 0.0:
                    iou = 0.0
                else:
                    iou = inter / ((be - bs) + (ends[i] - starts[i]) - inter)
                if method == HARD:
                    if iou >= iou_threshold:
                        continue
                elif method == LINEAR:
                    if iou >= iou_threshold:
                        cur[i] = cur[i] * (1.0 - iou)
                else:
                    cur[i] = cur[i] * math.exp(-(iou * iou) / sigma)
                if cur[i] < score_floor:
                    continue
            survivors.append(i)
        remaining = survivors
    return keep, kept_scores


def ahc_kernel(dist):
    """Average-linkage merge schedule over a symmetric distance matrix.

    Always merges the closest pair; ties go to the lexicographically smallest
    ``(i, j)`` where clusters are named by their smallest member. Returns
    ``(merges, heights)`` with ``merges[k] = (i, j)``, ``i < j``, cluster ``j``
    absorbed into ``i``.
    """
    D = np.array(dist, dtype=np.float64, copy=True)
    n = D.shape[0]
    merges = np.zeros((max(n - 1, 0), 2), dtype=np.int64)
    heights = np.zeros(max(n - 1, 0), dtype=np.float64)
    if n < 2:
        return merges, heights
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)
    rowmin = np.full(n, np.inf)
    rowarg = np.full(n, -1, dtype=np.int64)

    def recompute(k):
        vals = np.where(active[k + 1 :], D[k, k + 1 :], np.inf)
        if vals.size == 0 or not active[k + 1 :].any():
            rowmin[k] = np.inf
            rowarg[k] = -1
            return
        j = int(np.argmin(vals))
        rowmin[k] = vals[j]
        rowarg[k] = k + 1 + j

    for k in range(n - 1):
        recompute(k)

    for step in range(n - 1):
        i = int(np.argmin(rowmin))
        j = int(rowarg[i])
        merges[step] = (i, j)
        heights[step] = rowmin[i]
        na, nb = size[i], size[j]
        new = (na * D[i] + nb * D[j]) / (na + nb)
        D[i, :] = new
        D[:, i] = new
        size[i] = na + nb
        active[j] = False
        rowmin[j] = np.inf
        rowarg[j] = -1
        recompute(i)
        stale = np.nonzero(active & ((rowarg == i) | (rowarg == j)))[0]
        for k in stale:
            recompute(int(k))
        head = np.arange(i)
        ok = active[:i] & (rowarg[:i] != i) & (rowarg[:i] != j)
        col = D[:i, i]
        better = ok & ((col < rowmin[:i]) | ((col == rowmin[:i]) & (i < rowarg[:i])))
        idx = head[better]
        rowmin[idx] = col[better]
        rowarg[idx] = i
    return merges, heights
