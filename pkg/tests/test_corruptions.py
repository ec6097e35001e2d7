import numpy as np
import pytest

from sf_lens.errors import UnsupportedImageError
from sf_lens.shifts import (
    BRIGHTNESS_BETA,
    KINDS,
    LEVELS,
    NOISE_SIGMA,
    CorruptionSpec,
    corrupt,
)


@pytest.fixture
def smooth_image(rng):
    # band-limited random image, comfortably inside [0.2, 0.8]
    base = rng.uniform(0, 1, (64, 64, 3))
    from scipy.ndimage import gaussian_filter
    img = gaussian_filter(base, sigma=(6, 6, 0))
    img = (img - img.min()) / (img.max() - img.min())
    return 0.2 + 0.6 * img


class TestBrightness:
    def test_exact_mean_shift_on_constant(self):
        img = np.full((32, 32, 3), 0.5)
        out = corrupt(img, CorruptionSpec("brightness_up", 3), "img0")
        assert np.allclose(out, 0.5 + BRIGHTNESS_BETA[2], atol=1e-12)
        down = corrupt(img, CorruptionSpec("brightness_down", 2), "img0")
        assert np.allclose(down, 0.5 - BRIGHTNESS_BETA[1], atol=1e-12)

    def test_strictly_monotone_levels(self, smooth_image):
        means_up = [corrupt(smooth_image, CorruptionSpec("brightness_up", lv), "a").mean()
                    for lv in LEVELS]
        assert all(b > a for a, b in zip(means_up, means_up[1:]))
        means_down = [corrupt(smooth_image, CorruptionSpec("brightness_down", lv), "a").mean()
                      for lv in LEVELS]
        assert all(b < a for a, b in zip(means_down, means_down[1:]))

    def test_clamped(self):
        img = np.full((8, 8), 0.9)
        out = corrupt(img, CorruptionSpec("brightness_up", 5), "x")
        assert out.max() <= 1.0


class TestGaussianNoise:
    def test_variance_within_stat_bounds(self):
        img = np.full((64, 64), 0.5)
        out = corrupt(img, CorruptionSpec("gaussian_noise", 5, seed=0), "img-var")
        var = float(np.var(out - img))
        assert 0.008 <= var <= 0.012  # sigma=0.10 → var 0.01, 3-sigma stat bound

    def test_sigma_table_all_levels(self):
        img = np.full((64, 64), 0.5)
        for lv in LEVELS:
            out = corrupt(img, CorruptionSpec("gaussian_noise", lv, seed=1), "img-sd")
            sd = float(np.std(out - img))
            n = img.size
            bound = 3.0 * NOISE_SIGMA[lv - 1] / np.sqrt(2 * n)
            assert abs(sd - NOISE_SIGMA[lv - 1]) < bound


class TestDeterminismAndMonotonicity:
    def test_deterministic_per_seed_and_id(self, smooth_image):
        a = corrupt(smooth_image, CorruptionSpec("elastic", 3, seed=5), "case-1")
        b = corrupt(smooth_image, CorruptionSpec("elastic", 3, seed=5), "case-1")
        assert np.array_equal(a, b)

    def test_different_id_different_field(self, smooth_image):
        a = corrupt(smooth_image, CorruptionSpec("gaussian_noise", 3, seed=5), "case-1")
        b = corrupt(smooth_image, CorruptionSpec("gaussian_noise", 3, seed=5), "case-2")
        assert not np.array_equal(a, b)

    @pytest.mark.parametrize("kind", KINDS)
    def test_severity_monotone(self, smooth_image, kind):
        changes = []
        for lv in LEVELS:
            out = corrupt(smooth_image, CorruptionSpec(kind, lv, seed=3), "mono")
            changes.append(float(np.mean(np.abs(out - smooth_image))))
        assert all(b >= a - 1e-12 for a, b in zip(changes, changes[1:]))


class TestEnergyPreservation:
    @pytest.mark.parametrize("kind", ["motion_blur", "elastic"])
    def test_mean_preserved_within_two_percent(self, rng, kind):
        # image large relative to the level-5 displacement so the warp stays interior
        from scipy.ndimage import gaussian_filter
        base = rng.uniform(0, 1, (128, 128, 3))
        img = gaussian_filter(base, sigma=(12, 12, 0))
        img = (img - img.min()) / (img.max() - img.min())
        img = 0.2 + 0.6 * img
        for lv in LEVELS:
            out = corrupt(img, CorruptionSpec(kind, lv, seed=2), "energy")
            assert abs(out.mean() - img.mean()) < 0.02 * img.mean()


class TestShapeHandling:
    def test_shapes_preserved(self, smooth_image):
        for kind in KINDS:
            out = corrupt(smooth_image, CorruptionSpec(kind, 2, seed=0), "s")
            assert out.shape == smooth_image.shape
            assert out.min() >= 0.0 and out.max() <= 1.0
        gray = smooth_image[:, :, 0]
        out = corrupt(gray, CorruptionSpec("motion_blur", 2, seed=0), "s")
        assert out.shape == gray.shape

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(UnsupportedImageError):
            corrupt(np.zeros((8, 8, 4)), CorruptionSpec("elastic", 1), "bad")

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            CorruptionSpec("zoom_blur", 1)
        with pytest.raises(ValueError):
            CorruptionSpec("elastic", 6)
