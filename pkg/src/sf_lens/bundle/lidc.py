"""Binary label derivation for lung-nodule rating panels.

A nodule rated by four raters on a 1..5 malignancy scale counts as
malignant iff the mean rating is strictly greater than 2; a mean of
exactly 2 stays benign.
"""

from __future__ import annotations

import numpy as np

from ..errors import RatingOutOfRangeError

BENIGN = "benign"
MALIGNANT = "malignant"


def derive_lidc_label(ratings) -> str:
    """Label one nodule from its per-rater malignancy ratings."""
    arr = np.asarray(ratings, dtype=np.float64)
    for r in arr.ravel():
        if not (1.0 <= r <= 5.0):
            raise RatingOutOfRangeError(float(r))
    return MALIGNANT if arr.mean() > 2.0 else BENIGN


def derive_lidc_labels(ratings) -> np.ndarray:
    """Vectorized variant: (m, raters) ratings -> (m,) label strings."""
    arr = np.atleast_2d(np.asarray(ratings, dtype=np.float64))
    if np.any((arr < 1.0) | (arr > 5.0)):
        bad = arr.ravel()[np.flatnonzero((arr < 1.0) | (arr > 5.0))[0]]
        raise RatingOutOfRangeError(float(bad))
    return np.where(arr.mean(axis=1) > 2.0, MALIGNANT, BENIGN)
