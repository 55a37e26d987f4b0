"""Brute-force reference implementations, independent of the library code paths."""

from __future__ import annotations

import itertools

import numpy as np


def injective_maps(n_rows, n_cols):
    """Every partial injective map rows -> cols as a tuple of (row, col) pairs."""
    for k in range(min(n_rows, n_cols) + 1):
        for rows in itertools.combinations(range(n_rows), k):
            for cols in itertools.permutations(range(n_cols), k):
                yield tuple(zip(rows, cols))


def brute_assignment(w):
    """(best value, lexicographically smallest optimal positive-pair list)."""
    w = [list(map(float, row)) for row in w]
    n = len(w)
    m = len(w[0]) if n else 0
    best_val, best_pairs = 0.0, []
    for pairs in injective_maps(n, m):
        pairs = [(i, j) for i, j in pairs if w[i][j] > 0]
        val = 0.0
        for i, j in sorted(pairs):
            val += w[i][j]
        if val > best_val or (val == best_val and sorted(pairs) < best_pairs):
            best_val, best_pairs = val, sorted(pairs)
    return best_val, best_pairs


def _tracks_ms(ann):
    out = {}
    for seg in ann.segments:
        out.setdefault(seg.speaker, []).append((round(seg.start * 1000), round(seg.end * 1000)))
    return out


def brute_der(ref, hyp, collar=0.0, exclude_overlap=False):
    """DER on a 1 ms grid (exact for millisecond-aligned inputs), minimized over
    every injective hyp -> ref mapping. Returns (total, miss, fa, conf) in ms."""
    rt, ht = _tracks_ms(ref), _tracks_ms(hyp)
    horizon = max([e for t in (*rt.values(), *ht.values()) for _, e in t] + [0]) + round(collar * 1000) + 1
    R = np.zeros((len(rt), horizon), dtype=bool)
    H = np.zeros((len(ht), horizon), dtype=bool)
    for r, spk in enumerate(sorted(rt)):
        for s, e in rt[spk]:
            R[r, s:e] = True
    for h, spk in enumerate(sorted(ht)):
        for s, e in ht[spk]:
            H[h, s:e] = True
    scored = np.ones(horizon, dtype=bool)
    c = round(collar * 1000)
    if c:
        for spans in rt.values():
            for s, e in spans:
                for b in (s, e):
                    scored[max(0, b - c) : b + c] = False
    if exclude_overlap:
        scored &= R.sum(axis=0) < 2
    R &= scored
    H &= scored
    nr, nh = R.sum(axis=0), H.sum(axis=0)
    total = int(nr.sum())
    miss = int(np.maximum(nr - nh, 0).sum())
    fa = int(np.maximum(nh - nr, 0).sum())
    co = (R[:, None, :] & H[None, :, :]).sum(axis=2)
    best = 0
    for pairs in injective_maps(len(rt), len(ht)):
        best = max(best, sum(int(co[i, j]) for i, j in pairs))
    conf = int(np.minimum(nr, nh).sum()) - best
    return total, miss, fa, conf


def brute_average_linkage(vectors):
    """Merge schedule recomputing each average linkage from scratch."""
    v = np.asarray(vectors, dtype=np.float64)
    d = 1.0 - v @ v.T
    clusters = {i: [i] for i in range(len(v))}
    schedule = []
    while len(clusters) > 1:
        best = None
        keys = sorted(clusters)
        for a, b in itertools.combinations(keys, 2):
            dist = np.mean([d[x, y] for x in clusters[a] for y in clusters[b]])
            if best is None or dist < best[0] - 1e-12:
                best = (dist, a, b)
        _, a, b = best
        clusters[a] = clusters[a] + clusters.pop(b)
        schedule.append((a, b, best[0]))
    return schedule


def brute_partition(vectors, n_clusters):
    sched = brute_average_linkage(vectors)
    parent = list(range(len(vectors)))
    for a, b, _ in sched[: len(vectors) - n_clusters]:
        parent[b] = a

    def root(x):
        while parent[x] != x:
            x = parent[x]
        return x

    ids = {}
    return [ids.setdefault(root(x), len(ids)) for x in range(len(vectors))]
