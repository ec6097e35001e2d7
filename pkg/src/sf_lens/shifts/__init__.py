from .corruptions import (
    BLUR_LENGTH,
    BRIGHTNESS_BETA,
    ELASTIC_ALPHA,
    KINDS,
    LEVELS,
    NOISE_SIGMA,
    CorruptionSpec,
    brightness_shift,
    corrupt,
    noise_sigma,
)
from .presets import SplitPreset, apply_split, builtin_presets, preset_by_name

__all__ = [
    "CorruptionSpec",
    "corrupt",
    "KINDS",
    "LEVELS",
    "BRIGHTNESS_BETA",
    "BLUR_LENGTH",
    "ELASTIC_ALPHA",
    "NOISE_SIGMA",
    "brightness_shift",
    "noise_sigma",
    "SplitPreset",
    "builtin_presets",
    "preset_by_name",
    "apply_split",
]
