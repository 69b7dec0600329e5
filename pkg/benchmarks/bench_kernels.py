"""Benchmark the compiled kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py
Sizes mirror the production pipeline: a 3,000-entry label bank, 20x4000
trial matrices, and the SVM's (n_trials, 12) feature problems.
"""

import time

import numpy as np

from graspdec import _kernels_py

try:
    from graspdec import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, args_fn, calls=1):
    args = args_fn()
    rows = []
    for impl in filter(None, (_kernels_py, _ckernels)):
        fn = getattr(impl, name)
        t = timeit(lambda: [fn(*args) for _ in range(calls)])
        rows.append((impl.BACKEND, t / calls))
    line = f"{name:22s}"
    for backend, t in rows:
        line += f"  {backend}: {t * 1e3:9.3f} ms"
    if len(rows) == 2 and rows[1][1] > 0:
        line += f"  speedup: {rows[0][1] / rows[1][1]:6.1f}x"
    print(line)


def main():
    rng = np.random.default_rng(0)
    print(f"compiled extension available: {_ckernels is not None}\n")

    def scan_args():
        pool = np.ascontiguousarray(rng.uniform(0, 3, size=(3000, 4)))
        query = rng.uniform(0, 3, size=4)
        excluded = np.zeros(3000, dtype=np.uint8)
        tids = rng.integers(0, 200, size=3000).astype(np.int64)
        segs = rng.integers(0, 15, size=3000).astype(np.int64)
        return pool, query, excluded, tids, segs

    bench("nearest_label_scan", scan_args, calls=100)

    def median_args():
        return np.ascontiguousarray(rng.normal(size=(20, 4000))), 11

    bench("median_filter_rows", median_args, calls=3)

    def svm_args():
        n, d = 800, 12
        x = np.ascontiguousarray(rng.normal(size=(n, d)))
        y = np.where(rng.random(n) > 0.8, 1.0, -1.0)
        n_pos = max((y > 0).sum(), 1)
        n_neg = max((y < 0).sum(), 1)
        alpha = np.where(y > 0, 0.5 / n_pos, 0.5 / n_neg)
        return x, y, alpha, 1.0, 10_000, 1e-6

    bench("hinge_svm", svm_args)


if __name__ == "__main__":
    main()
