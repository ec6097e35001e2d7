"""Kernel backend selection.

Hot numeric loops (t-SNE, k-means, PCA matmuls) exist twice: a numba
@njit build and a vectorized pure-numpy build. The numba build is the
default when numba imports; set SF_LENS_BACKEND=numpy (or the legacy
switch SF_LENS_NO_NUMBA=1) to force the fallback. Both backends are
sequential, so results do not depend on thread counts.
"""

from __future__ import annotations

import os

NUMBA = "numba"
NUMPY = "numpy"

try:
    import numba  # noqa: F401

    _NUMBA_OK = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _NUMBA_OK = False


def _resolve_from_env() -> str:
    if os.environ.get("SF_LENS_NO_NUMBA", "") not in ("", "0"):
        return NUMPY
    choice = os.environ.get("SF_LENS_BACKEND", "auto").lower()
    if choice == NUMPY:
        return NUMPY
    if choice == NUMBA:
        if not _NUMBA_OK:
            raise RuntimeError("SF_LENS_BACKEND=numba but numba is not importable")
        return NUMBA
    return NUMBA if _NUMBA_OK else NUMPY


_BACKEND = _resolve_from_env()


def get_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Override the active backend ('numba' or 'numpy'); used by tests and benchmarks."""
    global _BACKEND
    if name not in (NUMBA, NUMPY):
        raise ValueError(f"unknown backend {name!r}")
    if name == NUMBA and not _NUMBA_OK:
        raise RuntimeError("numba backend requested but numba is not importable")
    _BACKEND = name


def numba_available() -> bool:
    return _NUMBA_OK
