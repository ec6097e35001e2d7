"""Seeded k-means with k-means++ initialization and Lloyd refinement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels

DEFAULT_K = 9
CENTER_MOVE_TOL = 1e-4
MAX_ITER = 300


@dataclass
class KmeansResult:
    centers: np.ndarray            # (k, dim)
    assignments: np.ndarray        # (m,)
    sse_history: list[float] = field(default_factory=list)
    iterations: int = 0


def _sq_dists_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center
    return np.einsum("ij,ij->i", diff, diff, optimize=False)


def kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: centers drawn proportional to squared distance."""
    m = points.shape[0]
    chosen = np.zeros(m, dtype=bool)
    first = int(rng.integers(m))
    centers = [points[first].copy()]
    chosen[first] = True
    d2 = _sq_dists_to(points, centers[0])
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # remaining mass is zero (duplicate points): take the first unchosen
            nxt = int(np.flatnonzero(~chosen)[0])
        else:
            cum = np.cumsum(d2 / total)
            nxt = int(np.searchsorted(cum, rng.random(), side="right"))
            nxt = min(nxt, m - 1)
        chosen[nxt] = True
        centers.append(points[nxt].copy())
        d2 = np.minimum(d2, _sq_dists_to(points, centers[-1]))
    return np.stack(centers)


def kmeans(points: np.ndarray, k: int = DEFAULT_K, seed: int = 0,
           tol: float = CENTER_MOVE_TOL, max_iter: int = MAX_ITER) -> KmeansResult:
    """Lloyd iterations until the largest center move drops below tol
    (and the assignment has stopped changing, so the result is a fixed
    point of Lloyd's two steps), capped at max_iter.

    k is capped at the number of points. Clusters that empty out keep their
    previous center, which preserves the non-increasing SSE guarantee.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    m = pts.shape[0]
    if m < 1:
        raise ValueError("kmeans needs at least one point")
    k = min(k, m)
    rng = np.random.default_rng(seed)
    centers = kmeans_pp_init(pts, k, rng)

    history: list[float] = []
    assign = np.zeros(m, dtype=np.int64)
    prev_assign = None
    it = 0
    for it in range(1, max_iter + 1):
        assign, new_centers, counts, sse = kernels.kmeans_step(pts, centers)
        history.append(float(sse))
        empty = counts == 0
        if np.any(empty):
            new_centers[empty] = centers[empty]
        move = float(np.sqrt(np.max(np.einsum("ij,ij->i", new_centers - centers,
                                              new_centers - centers, optimize=False))))
        stable = prev_assign is not None and np.array_equal(assign, prev_assign)
        centers = new_centers
        prev_assign = assign
        if move < tol and stable:
            break
    return KmeansResult(centers=centers, assignments=np.asarray(assign),
                        sse_history=history, iterations=it)
