"""Benchmark the hot kernels under both backends.

Usage: python benchmarks/bench_kernels.py [--n 1500] [--repeat 3]

The numba backend pays a one-time JIT compile on first call (cached on
disk afterwards); timings below exclude it by warming each kernel once.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sf_lens import backend, kernels
from sf_lens.analytics import kmeans, reduce_pca, reduce_tsne


def timeit(fn, repeat):
    fn()  # warm-up (includes JIT compile under numba)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, repeat, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 50))
    small = X[: min(n, 600)]
    Y = rng.standard_normal((min(n, 600), 3))
    P = np.abs(rng.standard_normal((Y.shape[0], Y.shape[0])))
    P = (P + P.T) / P.sum()
    pts3 = rng.standard_normal((n, 3))
    centers = pts3[:9].copy()

    cases = {
        "pairwise_sq_dists (600x50)": lambda: kernels.pairwise_sq_dists(small),
        "cond_affinities (600)": lambda: kernels.cond_affinities(
            kernels.pairwise_sq_dists(small), np.log(30.0)),
        "tsne_grad_exact (600)": lambda: kernels.tsne_grad_exact(P, Y),
        f"knn_sq_dists ({n}x50, k=90)": lambda: kernels.knn_sq_dists(X, 90),
        f"kmeans_step ({n}x3, k=9)": lambda: kernels.kmeans_step(pts3, centers),
        "ata (2000x50)": lambda: kernels.ata(X[: min(n, 2000)]),
    }
    pipelines = {
        "pca+tsne (500 pts, 300 it)": lambda: reduce_tsne(
            reduce_pca(X[:500], k=50).coords, seed=0, perplexity=25, iterations=300),
        f"kmeans ({n} pts, k=9)": lambda: kmeans(pts3, k=9, seed=0),
    }

    results = {}
    for name in ("numba", "numpy"):
        if name == "numba" and not backend.numba_available():
            continue
        backend.set_backend(name)
        for label, fn in {**cases, **pipelines}.items():
            results.setdefault(label, {})[name] = timeit(fn, repeat)

    width = max(len(k) for k in results)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, times in results.items():
        nb = times.get("numba")
        np_t = times.get("numpy")
        ratio = f"{np_t / nb:7.1f}x" if nb and np_t else "     n/a"
        print(f"{label:<{width}}  "
              f"{(f'{nb*1e3:8.1f}ms' if nb else '     n/a'):>10}  "
              f"{(f'{np_t*1e3:8.1f}ms' if np_t else '     n/a'):>10}  {ratio:>8}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=1500)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    bench(args.n, args.repeat)
