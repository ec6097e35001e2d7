"""PCA reduction of classifier latents ahead of the t-SNE embedding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import DegenerateDataError


@dataclass(frozen=True)
class PcaResult:
    coords: np.ndarray               # (n, k')
    components: np.ndarray           # (d, k'), columns ordered by descending variance
    explained_variance: np.ndarray   # (k',)
    mean: np.ndarray                 # (d,)


def reduce_pca(latents: np.ndarray, k: int = 50) -> PcaResult:
    """Mean-centered projection onto the top-k' principal components.

    k' = min(k, d, n-1). Component signs are fixed so the largest-magnitude
    coordinate of each component is positive, which makes the projection
    reproducible across eigensolver sign flips.
    """
    X = np.asarray(latents, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateDataError("PCA needs at least 2 points")
    n, d = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    if not np.any(Xc):
        raise DegenerateDataError("all points identical")
    cov = kernels.ata(Xc) / (n - 1)
    evals, evecs = np.linalg.eigh(cov)          # ascending
    order = np.argsort(evals)[::-1]
    k_eff = min(k, d, n - 1)
    components = evecs[:, order[:k_eff]].copy()
    explained = np.maximum(evals[order[:k_eff]], 0.0)
    for c in range(k_eff):
        pivot = int(np.argmax(np.abs(components[:, c])))
        if components[pivot, c] < 0:
            components[:, c] = -components[:, c]
    coords = kernels.matmul(Xc, components)
    return PcaResult(coords=coords, components=components,
                     explained_variance=explained, mean=mean)
