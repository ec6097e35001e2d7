"""Backend-dispatched numeric kernels.

Each public function resolves to the numba @njit build or the pure-numpy
build according to sf_lens.backend (env: SF_LENS_BACKEND / SF_LENS_NO_NUMBA).
Both builds are sequential and deterministic; they agree to float tolerance,
not bitwise.
"""

from __future__ import annotations

from .. import backend
from . import _np


def _mod():
    if backend.get_backend() == backend.NUMBA:
        from . import _nb
        return _nb
    return _np


def pairwise_sq_dists(X):
    return _mod().pairwise_sq_dists(X)


def cond_affinities(D2, log_perp, tol=1e-5, max_iter=50):
    return _mod().cond_affinities(D2, log_perp, tol, max_iter)


def cond_affinities_knn(knn_d2, log_perp, tol=1e-5, max_iter=50):
    return _mod().cond_affinities_knn(knn_d2, log_perp, tol, max_iter)


def tsne_grad_exact(P, Y):
    return _mod().tsne_grad_exact(P, Y)


def tsne_kl_exact(P, Y):
    return _mod().tsne_kl_exact(P, Y)


def knn_sq_dists(X, k):
    return _mod().knn_sq_dists(X, k)


def tsne_grad_sparse(indptr, indices, pvals, Y, theta):
    return _mod().tsne_grad_sparse_exact(indptr, indices, pvals, Y, theta)


def tsne_kl_sparse(indptr, indices, pvals, Y):
    return _mod().tsne_kl_sparse(indptr, indices, pvals, Y)


def kmeans_step(points, centers):
    return _mod().kmeans_step(points, centers)


def ata(X):
    return _mod().ata(X)


def matmul(A, B):
    return _mod().matmul(A, B)
