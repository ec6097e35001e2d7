"""Numba @njit kernel implementations (default backend).

All kernels are sequential (no parallel=True, no fastmath), so outputs are
bit-identical across repeated runs and across host thread counts. The
Barnes-Hut repulsion uses a flat-array octree; node pools grow by retrying
the build with doubled capacity when an insert overflows.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS = 1e-12
_MAX_DEPTH = 64


@njit(cache=True)
def pairwise_sq_dists(X):
    n = X.shape[0]
    d = X.shape[1]
    D2 = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for c in range(d):
                t = X[i, c] - X[j, c]
                acc += t * t
            D2[i, j] = acc
            D2[j, i] = acc
    return D2


@njit(cache=True)
def _row_affinities(dist_row, log_perp, tol, max_iter):
    """Binary-search the precision matching log_perp entropy; returns exp weights and their sum."""
    m = dist_row.shape[0]
    probs = np.empty(m)
    beta = 1.0
    beta_min = -np.inf
    beta_max = np.inf
    for _ in range(max_iter):
        s = 0.0
        ds = 0.0
        for j in range(m):
            e = np.exp(-dist_row[j] * beta)
            probs[j] = e
            s += e
            ds += dist_row[j] * e
        if s <= 0.0:
            h = -np.inf
        else:
            h = np.log(s) + beta * ds / s
        diff = h - log_perp
        if np.isfinite(h) and abs(diff) < tol:
            break
        if diff > 0:
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
    s = 0.0
    for j in range(m):
        s += probs[j]
    if s <= 0.0:
        for j in range(m):
            probs[j] = 1.0
        s = float(m)
    return probs, s


@njit(cache=True)
def cond_affinities(D2, log_perp, tol=1e-5, max_iter=50):
    n = D2.shape[0]
    P = np.zeros((n, n))
    row = np.empty(n - 1)
    for i in range(n):
        k = 0
        for j in range(n):
            if j != i:
                row[k] = D2[i, j]
                k += 1
        probs, s = _row_affinities(row, log_perp, tol, max_iter)
        k = 0
        for j in range(n):
            if j != i:
                P[i, j] = probs[k] / s
                k += 1
    return P


@njit(cache=True)
def cond_affinities_knn(knn_d2, log_perp, tol=1e-5, max_iter=50):
    n, k = knn_d2.shape
    vals = np.empty((n, k))
    for i in range(n):
        probs, s = _row_affinities(knn_d2[i].copy(), log_perp, tol, max_iter)
        for j in range(k):
            vals[i, j] = probs[j] / s
    return vals


@njit(cache=True)
def tsne_grad_exact(P, Y):
    n, dim = Y.shape
    W = np.zeros((n, n))
    Z = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for c in range(dim):
                t = Y[i, c] - Y[j, c]
                acc += t * t
            w = 1.0 / (1.0 + acc)
            W[i, j] = w
            W[j, i] = w
            Z += 2.0 * w
    grad = np.zeros((n, dim))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            w = W[i, j]
            q = w / Z
            if q < _EPS:
                q = _EPS
            mult = 4.0 * (P[i, j] - q) * w
            for c in range(dim):
                grad[i, c] += mult * (Y[i, c] - Y[j, c])
    return grad


@njit(cache=True)
def tsne_kl_exact(P, Y):
    n, dim = Y.shape
    Z = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for c in range(dim):
                t = Y[i, c] - Y[j, c]
                acc += t * t
            Z += 2.0 / (1.0 + acc)
    kl = 0.0
    for i in range(n):
        for j in range(n):
            if i == j or P[i, j] <= _EPS:
                continue
            acc = 0.0
            for c in range(dim):
                t = Y[i, c] - Y[j, c]
                acc += t * t
            q = (1.0 / (1.0 + acc)) / Z
            if q < _EPS:
                q = _EPS
            kl += P[i, j] * np.log(P[i, j] / q)
    return kl


@njit(cache=True)
def knn_sq_dists(X, k):
    n, d = X.shape
    idx = np.empty((n, k), dtype=np.int64)
    d2 = np.empty((n, k))
    row = np.empty(n)
    for i in range(n):
        for j in range(n):
            if j == i:
                row[j] = np.inf
            else:
                acc = 0.0
                for c in range(d):
                    t = X[i, c] - X[j, c]
                    acc += t * t
                row[j] = acc
        order = np.argsort(row)
        for q in range(k):
            idx[i, q] = order[q]
            d2[i, q] = row[order[q]]
    return idx, d2


# --- Barnes-Hut octree -------------------------------------------------------

@njit(cache=True)
def _build_octree(Y, capacity):
    """Flat-array octree. Returns (ok, n_nodes, cen, half, cnt, com, child, leaf_pt).

    leaf_pt: >=0 singleton point index, -1 internal/empty, -2 duplicate bucket.
    On pool overflow ok=False and the caller retries with more capacity.
    """
    n, dim = Y.shape
    cen = np.zeros((capacity, 3))
    half = np.zeros(capacity)
    cnt = np.zeros(capacity, dtype=np.int64)
    com = np.zeros((capacity, 3))
    child = np.full((capacity, 8), -1, dtype=np.int32)
    leaf_pt = np.full(capacity, -1, dtype=np.int32)

    lo = np.empty(3)
    hi = np.empty(3)
    for c in range(3):
        lo[c] = Y[0, c]
        hi[c] = Y[0, c]
    for i in range(n):
        for c in range(3):
            if Y[i, c] < lo[c]:
                lo[c] = Y[i, c]
            if Y[i, c] > hi[c]:
                hi[c] = Y[i, c]
    width = 0.0
    for c in range(3):
        cen[0, c] = 0.5 * (lo[c] + hi[c])
        if hi[c] - lo[c] > width:
            width = hi[c] - lo[c]
    half[0] = 0.5 * width + 1e-9
    n_nodes = 1

    for i in range(n):
        node = 0
        depth = 0
        while True:
            cnt[node] += 1
            for c in range(3):
                com[node, c] += Y[i, c]
            if cnt[node] == 1:
                leaf_pt[node] = i
                break
            if leaf_pt[node] >= 0:
                old = leaf_pt[node]
                same = True
                for c in range(3):
                    if Y[old, c] != Y[i, c]:
                        same = False
                        break
                if same or depth >= _MAX_DEPTH:
                    leaf_pt[node] = -2
                    break
                # push the resident point one level down
                leaf_pt[node] = -1
                o = 0
                for c in range(3):
                    if Y[old, c] >= cen[node, c]:
                        o += 1 << c
                if n_nodes >= capacity:
                    return False, n_nodes, cen, half, cnt, com, child, leaf_pt
                nc = n_nodes
                n_nodes += 1
                child[node, o] = nc
                h = 0.5 * half[node]
                half[nc] = h
                for c in range(3):
                    off = h if (o >> c) & 1 else -h
                    cen[nc, c] = cen[node, c] + off
                cnt[nc] = 1
                leaf_pt[nc] = old
                for c in range(3):
                    com[nc, c] += Y[old, c]
            if leaf_pt[node] == -2:
                break
            o = 0
            for c in range(3):
                if Y[i, c] >= cen[node, c]:
                    o += 1 << c
            if child[node, o] == -1:
                if n_nodes >= capacity:
                    return False, n_nodes, cen, half, cnt, com, child, leaf_pt
                nc = n_nodes
                n_nodes += 1
                child[node, o] = nc
                h = 0.5 * half[node]
                half[nc] = h
                for c in range(3):
                    off = h if (o >> c) & 1 else -h
                    cen[nc, c] = cen[node, c] + off
            node = child[node, o]
            depth += 1

    for v in range(n_nodes):
        if cnt[v] > 0:
            for c in range(3):
                com[v, c] /= cnt[v]
    return True, n_nodes, cen, half, cnt, com, child, leaf_pt


@njit(cache=True)
def _bh_repulsion(Y, cen, half, cnt, com, child, leaf_pt, theta):
    """Per-point approximate repulsion numerators and local normalization sums."""
    n = Y.shape[0]
    rep = np.zeros((n, 3))
    zsum = np.zeros(n)
    theta2 = theta * theta
    stack = np.empty(_MAX_DEPTH * 8 + 16, dtype=np.int32)
    for i in range(n):
        sp = 0
        stack[sp] = 0
        sp += 1
        acc_z = 0.0
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if cnt[node] == 0:
                continue
            d2 = 0.0
            for c in range(3):
                t = Y[i, c] - com[node, c]
                d2 += t * t
            width = 2.0 * half[node]
            is_leaf = True
            for o in range(8):
                if child[node, o] != -1:
                    is_leaf = False
                    break
            if is_leaf or width * width < theta2 * d2:
                w = 1.0 / (1.0 + d2)
                mass = cnt[node]
                acc_z += mass * w
                w2 = w * w * mass
                for c in range(3):
                    rep[i, c] += w2 * (Y[i, c] - com[node, c])
            else:
                for o in range(8):
                    nc = child[node, o]
                    if nc != -1:
                        stack[sp] = nc
                        sp += 1
        # remove the self term (w(0) = 1, zero displacement)
        zsum[i] = acc_z - 1.0
    return rep, zsum


def build_octree(Y):
    capacity = 4 * Y.shape[0] + 64
    while True:
        ok, n_nodes, cen, half, cnt, com, child, leaf_pt = _build_octree(Y, capacity)
        if ok:
            return n_nodes, cen, half, cnt, com, child, leaf_pt
        capacity *= 2


@njit(cache=True)
def _sparse_attraction(indptr, indices, pvals, Y):
    n = Y.shape[0]
    attr = np.zeros((n, 3))
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            d2 = 0.0
            for c in range(3):
                t = Y[i, c] - Y[j, c]
                d2 += t * t
            w = pvals[p] / (1.0 + d2)
            for c in range(3):
                attr[i, c] += w * (Y[i, c] - Y[j, c])
    return attr


def tsne_grad_sparse_exact(indptr, indices, pvals, Y, theta):
    """Sparse attraction + Barnes-Hut repulsion at the given theta."""
    _, cen, half, cnt, com, child, leaf_pt = build_octree(Y)
    rep, zsum = _bh_repulsion(Y, cen, half, cnt, com, child, leaf_pt, theta)
    Z = float(zsum.sum())
    attr = _sparse_attraction(indptr, indices, pvals, Y)
    return 4.0 * (attr - rep / Z)


@njit(cache=True)
def _sparse_kl(indptr, indices, pvals, Y, Z):
    n = Y.shape[0]
    kl = 0.0
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            v = pvals[p]
            if v <= _EPS:
                continue
            j = indices[p]
            d2 = 0.0
            for c in range(3):
                t = Y[i, c] - Y[j, c]
                d2 += t * t
            q = (1.0 / (1.0 + d2)) / Z
            if q < _EPS:
                q = _EPS
            kl += v * np.log(v / q)
    return kl


def tsne_kl_sparse(indptr, indices, pvals, Y):
    """KL over the sparse support with a Barnes-Hut-estimated normalization."""
    _, cen, half, cnt, com, child, leaf_pt = build_octree(Y)
    _, zsum = _bh_repulsion(Y, cen, half, cnt, com, child, leaf_pt, 0.5)
    Z = float(zsum.sum())
    return float(_sparse_kl(indptr, indices, pvals, Y, Z))


@njit(cache=True)
def kmeans_step(points, centers):
    m, d = points.shape
    k = centers.shape[0]
    assign = np.empty(m, dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    new_centers = np.zeros((k, d))
    sse = 0.0
    for i in range(m):
        best = 0
        best_d = np.inf
        for j in range(k):
            acc = 0.0
            for c in range(d):
                t = points[i, c] - centers[j, c]
                acc += t * t
            if acc < best_d:
                best_d = acc
                best = j
        assign[i] = best
        counts[best] += 1
        sse += best_d
        for c in range(d):
            new_centers[best, c] += points[i, c]
    for j in range(k):
        if counts[j] > 0:
            for c in range(d):
                new_centers[j, c] /= counts[j]
    return assign, new_centers, counts, sse


@njit(cache=True)
def ata(X):
    n, d = X.shape
    out = np.zeros((d, d))
    for i in range(n):
        for a in range(d):
            xa = X[i, a]
            for b in range(a, d):
                out[a, b] += xa * X[i, b]
    for a in range(d):
        for b in range(a):
            out[a, b] = out[b, a]
    return out


@njit(cache=True)
def matmul(A, B):
    n, k = A.shape
    m = B.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for t in range(k):
            a = A[i, t]
            if a != 0.0:
                for j in range(m):
                    out[i, j] += a * B[t, j]
    return out
