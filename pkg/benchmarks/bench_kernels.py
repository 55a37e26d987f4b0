"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from detdiar import _kernels_py as py
from detdiar.kernels import GAUSSIAN, HARD

try:
    from detdiar import _kernels as cy
except ImportError:
    cy = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def nms_case(n, rng):
    starts = rng.uniform(0, 60, n)
    ends = starts + rng.uniform(0.2, 5, n)
    scores = rng.uniform(0, 1, n)
    groups = rng.integers(0, 4, n).astype(np.int64)
    order = np.lexsort((ends, groups, starts))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return starts, ends, scores, groups, rank


def ahc_case(n, rng):
    x = rng.standard_normal((n, 32))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    d = 1 - x @ x.T
    np.fill_diagonal(d, 0)
    return np.triu(d) + np.triu(d, 1).T


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}  identical")
    rows = []
    for method, name in ((GAUSSIAN, "gaussian"), (HARD, "hard")):
        case = nms_case(1000, rng)
        rows.append((f"soft_nms n=1000 {name}",
                     lambda m, c=case, k=method: m.soft_nms_kernel(*c, k, 0.5, 0.5, 0.001, 100)))
    for n in (200, 500, 1000, 2000):
        d = ahc_case(n, rng)
        rows.append((f"ahc n={n}", lambda m, d=d: m.ahc_kernel(d)))
    for label, call in rows:
        t_py, out_py = _best(lambda: call(py), args.repeat)
        if cy is None:
            print(f"{label:<28}{t_py * 1e3:>14.2f}")
            continue
        t_cy, out_cy = _best(lambda: call(cy), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(out_py, out_cy))
        print(f"{label:<28}{t_py * 1e3:>14.2f}{t_cy * 1e3:>14.2f}{t_py / t_cy:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
