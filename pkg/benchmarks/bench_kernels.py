"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 3] [--trees 20]

Problem sizes follow the synthetic corpus: 2190 training rows, 730 query
rows, 4 features. Every timed call is also checked for bit-identical output.
"""
import argparse
import time

import numpy as np

from coarcta import kernels
from coarcta.regression.ensemble import RandomForestRegressor


def best_of(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def problem(seed=0, n_train=2190, n_query=730):
    rng = np.random.default_rng(seed)
    X = np.column_stack([
        rng.uniform(0.0, 0.6, n_train),
        rng.integers(0, 6, n_train),
        rng.integers(0, 2, n_train),
        rng.uniform(95.0, 140.0, n_train),
    ]).astype(np.float64)
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    y = np.abs(np.sin(3.0 * X[:, 0]) + 0.1 * X[:, 1]) + 0.02 * rng.normal(size=n_train)
    Q = X[rng.integers(0, n_train, n_query)] + 0.01 * rng.normal(size=(n_query, 4))
    return X, y, Q


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--trees", type=int, default=20)
    args = parser.parse_args(argv)

    if "cython" not in kernels.BACKENDS:
        print("compiled backend not built; only the numpy fallback is available")
        return 1
    X, y, Q = problem()
    idx = np.arange(len(y))
    feats = np.arange(X.shape[1])

    cases = {
        "best_split (root, 2190 rows)": lambda: kernels.best_split(X, y, idx, feats, 1),
        "knn_predict (730 x 2190, k=5)": lambda: kernels.knn_predict(X, y, Q, 5),
        f"forest fit ({args.trees} trees)": lambda: RandomForestRegressor(n_trees=args.trees, seed=0)
        .fit(X, y).predict(Q),
    }
    previous = kernels.BACKEND
    print(f"{'kernel':34s} {'cython s':>10s} {'numpy s':>10s} {'speedup':>8s}  identical")
    try:
        for name, fn in cases.items():
            timing, outputs = {}, {}
            for backend in ("cython", "python"):
                kernels.set_backend(backend)
                timing[backend], outputs[backend] = best_of(fn, args.repeat)
            same = np.array_equal(np.asarray(outputs["cython"]), np.asarray(outputs["python"]))
            print(f"{name:34s} {timing['cython']:10.4f} {timing['python']:10.4f} "
                  f"{timing['python'] / timing['cython']:7.1f}x  {same}")
    finally:
        kernels.set_backend(previous)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
