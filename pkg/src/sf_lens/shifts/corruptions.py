"""Image corruption transforms at five severity levels.

Parameter tables follow ImageNet-C-style conventions (the severity values
are declared conventions of this engine, tuned for monotone severity):

    brightness   additive +/- {0.1, 0.2, 0.3, 0.4, 0.5} in [0,1] space
    motion blur  45-degree line kernel, length {5, 9, 13, 17, 21} px
    elastic      max displacement {8, 16, 24, 32, 40} px, smoothing sigma 8 px
    gaussian     noise sigma {0.04, 0.06, 0.08, 0.09, 0.10}

The random field behind noise and elastic is drawn from (seed, image id)
only, never from the level, so per-image severity is exactly monotone and
corruption of a batch is order-independent.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import UnsupportedImageError

BRIGHTNESS_UP = "brightness_up"
BRIGHTNESS_DOWN = "brightness_down"
MOTION_BLUR = "motion_blur"
ELASTIC = "elastic"
GAUSSIAN_NOISE = "gaussian_noise"

KINDS = (BRIGHTNESS_UP, BRIGHTNESS_DOWN, MOTION_BLUR, ELASTIC, GAUSSIAN_NOISE)
LEVELS = (1, 2, 3, 4, 5)

BRIGHTNESS_BETA = (0.1, 0.2, 0.3, 0.4, 0.5)
BLUR_LENGTH = (5, 9, 13, 17, 21)
ELASTIC_ALPHA = (8.0, 16.0, 24.0, 32.0, 40.0)
ELASTIC_SIGMA = 8.0
NOISE_SIGMA = (0.04, 0.06, 0.08, 0.09, 0.10)


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    level: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.level not in LEVELS:
            raise ValueError(f"corruption level must be 1..5, got {self.level}")


def _rng_for(seed: int, image_id: str) -> np.random.Generator:
    digest = hashlib.sha256(image_id.encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, *words]))


def _check_image(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        return arr[:, :, None]
    if arr.ndim == 3 and arr.shape[2] in (1, 3):
        return arr
    raise UnsupportedImageError(f"expected HxW or HxWx{{1,3}} image, got shape {arr.shape}")


def _blur_kernel(length: int) -> np.ndarray:
    k = np.zeros((length, length))
    np.fill_diagonal(k, 1.0 / length)  # 45-degree line, energy preserving
    return k


def corrupt(image: np.ndarray, spec: CorruptionSpec, image_id: str = "") -> np.ndarray:
    """Apply one corruption; same shape out, pixels clamped to [0, 1]."""
    arr = _check_image(image)
    squeeze = np.asarray(image).ndim == 2
    idx = spec.level - 1

    if spec.kind == BRIGHTNESS_UP:
        out = arr + BRIGHTNESS_BETA[idx]
    elif spec.kind == BRIGHTNESS_DOWN:
        out = arr - BRIGHTNESS_BETA[idx]
    elif spec.kind == MOTION_BLUR:
        kernel = _blur_kernel(BLUR_LENGTH[idx])
        out = np.stack(
            [ndimage.convolve(arr[:, :, c], kernel, mode="reflect") for c in range(arr.shape[2])],
            axis=2,
        )
    elif spec.kind == GAUSSIAN_NOISE:
        rng = _rng_for(spec.seed, image_id)
        unit = rng.standard_normal(arr.shape)
        out = arr + NOISE_SIGMA[idx] * unit
    else:  # elastic
        rng = _rng_for(spec.seed, image_id)
        h, w = arr.shape[:2]
        raw = rng.uniform(-1.0, 1.0, size=(2, h, w))
        dy = ndimage.gaussian_filter(raw[0], ELASTIC_SIGMA, mode="reflect")
        dx = ndimage.gaussian_filter(raw[1], ELASTIC_SIGMA, mode="reflect")
        mag = np.sqrt(dy * dy + dx * dx)
        peak = float(mag.max())
        if peak > 0:
            scale = ELASTIC_ALPHA[idx] / peak
            dy, dx = dy * scale, dx * scale
        rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        coords = np.stack([rows + dy, cols + dx])
        out = np.stack(
            [ndimage.map_coordinates(arr[:, :, c], coords, order=1, mode="reflect")
             for c in range(arr.shape[2])],
            axis=2,
        )

    out = np.clip(out, 0.0, 1.0)
    return out[:, :, 0] if squeeze else out


def brightness_shift(level: int) -> float:
    """Pre-clamp mean shift of the brightness transforms at a level."""
    return BRIGHTNESS_BETA[level - 1]


def noise_sigma(level: int) -> float:
    return NOISE_SIGMA[level - 1]
