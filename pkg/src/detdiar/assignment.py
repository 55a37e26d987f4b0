"""Maximum-weight one-to-one matching (rectangular Hungarian method)."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DiarizationError

Pairs = list[tuple[int, int]]


def _hungarian_min(cost: list[list[float]]) -> list[int]:
    """Minimum-cost assignment for ``n <= m``; returns the column of each row.

    Shortest augmenting path with row/column potentials, O(n^2 m).
    """
    n = len(cost)
    m = len(cost[0])
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    cols = [0] * n
    for j in range(1, m + 1):
        if p[j]:
            cols[p[j] - 1] = j - 1
    return cols


def max_weight_matching(w: Sequence[Sequence[float]]) -> Pairs:
    """Any maximum-weight matching of a non-negative matrix, sorted by row."""
    n = len(w)
    m = len(w[0]) if n else 0
    if n == 0 or m == 0:
        return []
    if n <= m:
        cols = _hungarian_min([[-x for x in row] for row in w])
        pairs = list(enumerate(cols))
    else:
        wt = [[w[i][j] for i in range(n)] for j in range(m)]
        rows = _hungarian_min([[-x for x in row] for row in wt])
        pairs = sorted((i, j) for j, i in enumerate(rows))
    return [(i, j) for i, j in pairs if w[i][j] > 0]


def matching_value(w: Sequence[Sequence[float]], pairs: Pairs) -> float:
    total = 0.0
    for i, j in sorted(pairs):
        total += w[i][j]
    return total


def _sub_best(w, rows: list[int], cols: list[int]) -> tuple[float, Pairs]:
    if not rows or not cols:
        return 0.0, []
    sub = [[w[i][j] for j in cols] for i in rows]
    pairs = [(rows[a], cols[b]) for a, b in max_weight_matching(sub)]
    return matching_value(w, pairs), pairs


def optimal_mapping(matrix) -> Pairs:
    """Maximum total-overlap one-to-one mapping between rows and columns.

    Zero-weight pairs are left out. Among optimal matchings the
    lexicographically smallest sorted pair list is returned; values within a
    relative 1e-12 of the optimum count as ties.
    """
    w = np.asarray(matrix, dtype=np.float64)
    if w.ndim != 2:
        raise DiarizationError("overlap matrix must be 2-D")
    if w.size and (not np.all(np.isfinite(w)) or np.any(w < 0)):
        raise DiarizationError("overlap matrix must be finite and non-negative")
    w = w.tolist()
    n = len(w)
    m = len(w[0]) if n else 0
    target, best = _sub_best(w, list(range(n)), list(range(m)))
    tol = 1e-12 * max(1.0, target)
    chosen: Pairs = []
    free = list(range(m))
    first_row = 0
    while best:
        # ``best`` is one optimum of the remaining subproblem; only pairs that
        # sort before its first pair can beat it lexicographically
        bound = best[0]
        pick = bound
        pick_rest = None
        for i in range(first_row, bound[0] + 1):
            for j in free:
                if (i, j) >= bound:
                    break
                if w[i][j] <= 0:
                    continue
                rest_value, rest = _sub_best(w, list(range(i + 1, n)), [c for c in free if c != j])
                if w[i][j] + rest_value >= target - tol:
                    pick, pick_rest = (i, j), (rest_value, rest)
                    break
            if pick_rest is not None:
                break
        if pick_rest is None:
            rest = best[1:]
            rest_value = matching_value(w, rest)
        else:
            rest_value, rest = pick_rest
        chosen.append(pick)
        free.remove(pick[1])
        first_row = pick[0] + 1
        target, best = rest_value, rest
    return chosen
