"""t-SNE to three dimensions.

Dense affinities and exact gradients up to `exact_threshold` points;
above that, affinities are restricted to the 3*perplexity nearest
neighbors and repulsion is Barnes-Hut approximated (theta) on the numba
backend. Optimization follows common practice: early exaggeration x12 for
the first 250 iterations, learning rate max(n/12, 50), momentum 0.5
switching to 0.8 at iteration 250, adaptive per-coordinate gains. All
randomness comes from the seed, so repeated runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .. import kernels
from ..errors import PerplexityTooLargeError

EXACT_THRESHOLD = 1000
EE_FACTOR = 12.0
EE_ITERS = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MIN_GAIN = 0.01


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    seed: int = 0
    theta: float = 0.5
    exact_threshold: int = EXACT_THRESHOLD
    kl_every: int = 50

    def to_json(self):
        return {
            "perplexity": self.perplexity,
            "iterations": self.iterations,
            "seed": self.seed,
            "theta": self.theta,
            "exact_threshold": self.exact_threshold,
        }


@dataclass
class TsneResult:
    coords: np.ndarray                       # (n, 3)
    kl_trace: list[tuple[int, float]] = field(default_factory=list)
    mode: str = "exact"                      # "exact" | "sparse"


def _dense_affinities(X: np.ndarray, perplexity: float) -> np.ndarray:
    D2 = kernels.pairwise_sq_dists(X)
    P = kernels.cond_affinities(D2, np.log(perplexity))
    P = (P + P.T) / (2.0 * X.shape[0])
    P = np.maximum(P, 1e-12)
    np.fill_diagonal(P, 0.0)
    return P


def _sparse_affinities(X: np.ndarray, perplexity: float):
    n = X.shape[0]
    k = min(n - 1, int(3 * perplexity))
    idx, d2 = kernels.knn_sq_dists(X, k)
    vals = kernels.cond_affinities_knn(d2, np.log(perplexity))
    rows = np.repeat(np.arange(n, dtype=np.int64), k)
    cond = scipy.sparse.csr_matrix((vals.ravel(), (rows, idx.ravel())), shape=(n, n))
    sym = (cond + cond.T) / (2.0 * n)
    sym = sym.tocsr()
    sym.sort_indices()
    return sym.indptr.astype(np.int64), sym.indices.astype(np.int64), sym.data.astype(np.float64)


def reduce_tsne(points: np.ndarray, seed: int, perplexity: float = 30.0,
                iterations: int = 1000, theta: float = 0.5,
                exact_threshold: int = EXACT_THRESHOLD, kl_every: int = 50) -> TsneResult:
    X = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    n = X.shape[0]
    if n < 4:
        raise PerplexityTooLargeError(perplexity, n)
    if perplexity >= (n - 1) / 3.0:
        raise PerplexityTooLargeError(perplexity, n)

    exact = n <= exact_threshold
    if exact:
        P = _dense_affinities(X, perplexity)
        P_ee = P * EE_FACTOR
        kl_of = lambda Y: float(kernels.tsne_kl_exact(P, Y))  # noqa: E731
        grad_of = lambda Y, ee: kernels.tsne_grad_exact(P_ee if ee else P, Y)  # noqa: E731
    else:
        indptr, indices, pvals = _sparse_affinities(X, perplexity)
        pvals_ee = pvals * EE_FACTOR
        kl_of = lambda Y: float(kernels.tsne_kl_sparse(indptr, indices, pvals, Y))  # noqa: E731
        grad_of = lambda Y, ee: kernels.tsne_grad_sparse(  # noqa: E731
            indptr, indices, pvals_ee if ee else pvals, Y, theta)

    rng = np.random.default_rng(seed)
    Y = 1e-4 * rng.standard_normal((n, 3))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    lr = max(n / 12.0, 50.0)
    ee_until = min(EE_ITERS, iterations)

    trace = [(0, kl_of(Y))]
    for it in range(iterations):
        grad = grad_of(Y, it < ee_until)
        momentum = MOMENTUM_EARLY if it < EE_ITERS else MOMENTUM_LATE
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - lr * gains * grad
        Y = Y + velocity
        Y -= Y.mean(axis=0)
        if kl_every and (it + 1) % kl_every == 0 and it + 1 != iterations:
            trace.append((it + 1, kl_of(Y)))

    trace.append((iterations, kl_of(Y)))
    return TsneResult(coords=Y, kl_trace=trace, mode="exact" if exact else "sparse")
