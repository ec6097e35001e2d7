"""Pure-numpy kernel implementations (fallback backend).

Deliberately avoids BLAS-backed calls (np.dot / @): einsum with
optimize=False runs numpy's own sequential loops, so results do not
depend on the BLAS thread count. The Barnes-Hut repulsion has no
vectorized form; this backend computes exact repulsion instead (the
driver only routes n <= exact threshold here, or accepts the cost).
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X, optimize=False)
    cross = np.einsum("ic,jc->ij", X, X, optimize=False)
    D2 = sq[:, None] + sq[None, :] - 2.0 * cross
    np.fill_diagonal(D2, 0.0)
    return np.maximum(D2, 0.0)


def cond_affinities(D2: np.ndarray, log_perp: float, tol: float = 1e-5,
                    max_iter: int = 50) -> np.ndarray:
    """Row-conditional affinities p_{j|i} with per-row precision found by binary search."""
    n = D2.shape[0]
    P = np.zeros((n, n))
    for i in range(n):
        row = np.delete(D2[i], i)
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        probs = np.empty_like(row)
        for _ in range(max_iter):
            probs = np.exp(-row * beta)
            s = probs.sum()
            if s <= 0.0:
                h = -np.inf
            else:
                h = np.log(s) + beta * float(np.einsum("j,j->", row, probs)) / s
            diff = h - log_perp
            if np.isfinite(h) and abs(diff) < tol:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        s = probs.sum()
        if s <= 0.0:  # every other point infinitely far; fall back to uniform
            probs = np.ones_like(row)
            s = probs.sum()
        vals = probs / s
        P[i, :i] = vals[:i]
        P[i, i + 1:] = vals[i:]
    return P


def tsne_grad_exact(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Gradient of the KL objective with exact O(n^2) repulsion."""
    D2 = pairwise_sq_dists(Y)
    W = 1.0 / (1.0 + D2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    Q = np.maximum(W / Z, _EPS)
    M = (P - Q) * W
    row = M.sum(axis=1)
    grad = 4.0 * (row[:, None] * Y - np.einsum("ij,jc->ic", M, Y, optimize=False))
    return grad


def tsne_kl_exact(P: np.ndarray, Y: np.ndarray) -> float:
    D2 = pairwise_sq_dists(Y)
    W = 1.0 / (1.0 + D2)
    np.fill_diagonal(W, 0.0)
    Q = np.maximum(W / W.sum(), _EPS)
    mask = P > _EPS
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def knn_sq_dists(X: np.ndarray, k: int, chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Indices and squared distances of the k nearest neighbors (self excluded)."""
    n = X.shape[0]
    sq = np.einsum("ij,ij->i", X, X, optimize=False)
    idx = np.empty((n, k), dtype=np.int64)
    d2 = np.empty((n, k))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        cross = np.einsum("ic,jc->ij", X[start:stop], X, optimize=False)
        block = np.maximum(sq[start:stop, None] + sq[None, :] - 2.0 * cross, 0.0)
        block[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        idx[start:stop] = order
        d2[start:stop] = np.take_along_axis(block, order, axis=1)
    return idx, d2


def cond_affinities_knn(knn_d2: np.ndarray, log_perp: float, tol: float = 1e-5,
                        max_iter: int = 50) -> np.ndarray:
    """Per-row conditional affinities over the neighbor lists only."""
    n, k = knn_d2.shape
    vals = np.empty((n, k))
    for i in range(n):
        row = knn_d2[i]
        beta, beta_min, beta_max = 1.0, -np.inf, np.inf
        probs = np.empty_like(row)
        for _ in range(max_iter):
            probs = np.exp(-row * beta)
            s = probs.sum()
            if s <= 0.0:
                h = -np.inf
            else:
                h = np.log(s) + beta * float(np.einsum("j,j->", row, probs)) / s
            diff = h - log_perp
            if np.isfinite(h) and abs(diff) < tol:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        s = probs.sum()
        if s <= 0.0:
            probs = np.ones_like(row)
            s = probs.sum()
        vals[i] = probs / s
    return vals


def tsne_grad_sparse_exact(indptr: np.ndarray, indices: np.ndarray, pvals: np.ndarray,
                           Y: np.ndarray, theta: float) -> np.ndarray:
    """Sparse attraction + exact repulsion (numpy stand-in for the Barnes-Hut path).

    theta is accepted for signature parity and ignored; exact repulsion is
    a theta=0 Barnes-Hut evaluation.
    """
    n, dim = Y.shape
    D2 = pairwise_sq_dists(Y)
    W = 1.0 / (1.0 + D2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    W2 = W * W
    rep = np.einsum("ij->i", W2, optimize=False)[:, None] * Y \
        - np.einsum("ij,jc->ic", W2, Y, optimize=False)
    attr = np.zeros((n, dim))
    for i in range(n):
        js = indices[indptr[i]:indptr[i + 1]]
        ps = pvals[indptr[i]:indptr[i + 1]]
        diff = Y[i] - Y[js]
        w = 1.0 / (1.0 + np.einsum("jc,jc->j", diff, diff, optimize=False))
        attr[i] = np.einsum("j,jc->c", ps * w, diff, optimize=False)
    return 4.0 * (attr - rep / Z)


def tsne_kl_sparse(indptr: np.ndarray, indices: np.ndarray, pvals: np.ndarray,
                   Y: np.ndarray) -> float:
    """KL over the sparse support, with the exact normalization constant."""
    D2 = pairwise_sq_dists(Y)
    W = 1.0 / (1.0 + D2)
    np.fill_diagonal(W, 0.0)
    Z = W.sum()
    kl = 0.0
    n = Y.shape[0]
    for i in range(n):
        js = indices[indptr[i]:indptr[i + 1]]
        ps = pvals[indptr[i]:indptr[i + 1]]
        diff = Y[i] - Y[js]
        w = 1.0 / (1.0 + np.einsum("jc,jc->j", diff, diff, optimize=False))
        q = np.maximum(w / Z, _EPS)
        keep = ps > _EPS
        kl += float(np.sum(ps[keep] * np.log(ps[keep] / q[keep])))
    return kl


def kmeans_step(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """One Lloyd iteration: assignment to current centers, then mean update.

    Returns (assignments, new_centers, counts, sse) where sse is measured
    against the centers used for assignment.
    """
    m = points.shape[0]
    k = centers.shape[0]
    diff = points[:, None, :] - centers[None, :, :]
    d2 = np.einsum("mkc,mkc->mk", diff, diff, optimize=False)
    assign = np.argmin(d2, axis=1)
    sse = float(d2[np.arange(m), assign].sum())
    counts = np.bincount(assign, minlength=k).astype(np.int64)
    new_centers = np.zeros_like(centers)
    for c in range(points.shape[1]):
        new_centers[:, c] = np.bincount(assign, weights=points[:, c], minlength=k)
    nonzero = counts > 0
    new_centers[nonzero] /= counts[nonzero, None]
    return assign, new_centers, counts, sse


def ata(X: np.ndarray) -> np.ndarray:
    """X.T @ X without BLAS."""
    return np.einsum("ia,ib->ab", X, X, optimize=False)


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A @ B without BLAS."""
    return np.einsum("ik,kj->ij", A, B, optimize=False)
