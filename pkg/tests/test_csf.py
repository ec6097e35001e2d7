import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sf_lens.csf import (
    available_channels,
    compute_channel,
    dg_res,
    entropy,
    external_channel,
    mcd_channels,
    msr,
    pe,
    softmax,
)
from sf_lens.errors import UnknownChannelError, WidthMismatchError
from sf_lens.metrics import aurc, rc_curve

from conftest import make_bundle, make_run

E2 = np.exp(2.0)


class TestSoftmax:
    def test_closed_form_two_zero(self):
        p = softmax(np.array([2.0, 0.0]))
        assert p[0] == pytest.approx(E2 / (E2 + 1.0), abs=1e-12)
        assert p[1] == pytest.approx(1.0 / (E2 + 1.0), abs=1e-12)

    def test_constant_rows_are_uniform(self):
        for k in (2, 3, 7):
            p = softmax(np.full(k, 3.3))
            assert np.allclose(p, 1.0 / k, atol=1e-15)

    def test_huge_logit_does_not_overflow(self):
        p = softmax(np.array([1000.0, 0.0]))
        assert np.all(np.isfinite(p))
        assert p[0] == pytest.approx(1.0)
        assert p[1] == pytest.approx(0.0, abs=1e-300)

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=8))
    @settings(max_examples=100)
    def test_simplex_invariants(self, logits):
        p = softmax(np.array(logits))
        assert np.all(p >= 0) and np.all(p <= 1)
        assert abs(p.sum() - 1.0) < 1e-6


class TestMsrPe:
    def test_msr_two_zero(self):
        assert msr(np.array([2.0, 0.0])) == pytest.approx(0.880797, abs=1e-6)

    def test_msr_bounds(self):
        assert msr(np.array([1.0, 1.0])) == pytest.approx(0.5)
        assert msr(np.array([1e4, 0.0, 0.0])) == pytest.approx(1.0)

    def test_pe_uniform_k4(self):
        assert pe(np.full(4, 2.0)) == pytest.approx(-np.log(4.0), abs=1e-12)

    def test_pe_one_hot_is_zero(self):
        assert pe(np.array([1e4, 0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_pe_two_zero(self):
        # oracle: plug the exact softmax into H
        p = softmax(np.array([2.0, 0.0]))
        expected = float(np.sum(p * np.log(p)))
        assert expected == pytest.approx(-0.365334, abs=1e-6)
        assert pe(np.array([2.0, 0.0])) == pytest.approx(expected, abs=1e-12)

    def test_entropy_zero_times_log_zero(self):
        assert entropy(np.array([1.0, 0.0, 0.0])) == 0.0

    def test_shift_invariance(self, rng):
        logits = rng.standard_normal((30, 5))
        shifted = logits + 13.7
        assert np.allclose(msr(logits), msr(shifted), atol=1e-12)
        assert np.allclose(pe(logits), pe(shifted), atol=1e-12)


class TestMcd:
    def test_t1_degenerates_to_softmax_channels(self, rng):
        logits = rng.standard_normal((40, 3))
        out = mcd_channels(logits[:, None, :])
        assert np.allclose(out["mcd-msr"], msr(logits), atol=1e-12)
        assert np.allclose(out["mcd-pe"], pe(logits), atol=1e-12)
        assert np.allclose(out["mcd-ee"], pe(logits), atol=1e-12)

    def test_disagreeing_one_hot_samples(self):
        # two samples: p1 -> [1,0], p2 -> [0,1]; mean is uniform
        stack = np.array([[1e4, 0.0], [0.0, 1e4]])
        out = mcd_channels(stack)
        assert out["mcd-ee"] == pytest.approx(0.0, abs=1e-12)
        assert out["mcd-pe"] == pytest.approx(-np.log(2.0), abs=1e-12)
        assert out["mcd-msr"] == pytest.approx(0.5, abs=1e-12)

    def test_identical_samples_close_jensen_gap(self, rng):
        row = rng.standard_normal(4)
        stack = np.tile(row, (5, 1))
        out = mcd_channels(stack)
        assert out["mcd-pe"] == pytest.approx(out["mcd-ee"], abs=1e-12)

    def test_jensen_inequality_pointwise(self, rng):
        stack = rng.standard_normal((200, 6, 4))
        out = mcd_channels(stack)
        assert np.all(out["mcd-ee"] >= out["mcd-pe"] - 1e-12)


class TestDgRes:
    def test_uniform_three_way(self):
        assert dg_res(np.zeros(3), K=2) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_limits(self):
        assert dg_res(np.array([5.0, 5.0, -1e4]), K=2) == pytest.approx(1.0)
        assert dg_res(np.array([0.0, 0.0, 1e4]), K=2) == pytest.approx(0.0)

    def test_width_checked(self):
        with pytest.raises(WidthMismatchError):
            dg_res(np.zeros((4, 4)), K=2)


class TestChannels:
    def _bundle(self, rng, K=2):
        n = 50
        logits = rng.standard_normal((n, K))
        run = make_run(
            ids=[f"r{i}" for i in range(n)],
            labels=rng.integers(0, K, n),
            logits=logits,
            mcd=logits[:, None, :] + 0.1 * rng.standard_normal((n, 3, K)),
            dg=np.concatenate([logits, rng.standard_normal((n, 1))], axis=1),
            ext={"confidnet": rng.uniform(0, 1, n)},
        )
        return make_bundle([run], K=K, T=3, channels=("confidnet",), has_dg=True)

    def test_available_channels_order(self, rng):
        bundle = self._bundle(rng)
        assert available_channels(bundle) == [
            "msr", "pe", "mcd-msr", "mcd-pe", "mcd-ee", "dg-res", "ext:confidnet"]

    def test_every_channel_computes_finite(self, rng):
        bundle = self._bundle(rng)
        for name in available_channels(bundle):
            scores = compute_channel(bundle.runs[0], name, bundle.manifest.K)
            assert scores.shape == (50,)
            assert np.all(np.isfinite(scores))

    def test_unknown_channel(self, rng):
        bundle = self._bundle(rng)
        with pytest.raises(UnknownChannelError):
            compute_channel(bundle.runs[0], "ext:nope", 2)
        with pytest.raises(UnknownChannelError):
            external_channel(bundle.runs[0], "nope")

    def test_channels_are_deterministic(self, rng):
        bundle = self._bundle(rng)
        a = compute_channel(bundle.runs[0], "mcd-pe", 2)
        b = compute_channel(bundle.runs[0], "mcd-pe", 2)
        assert np.array_equal(a, b)


class TestRankingEquivalenceK2:
    def test_msr_pe_identical_curves(self, rng):
        n = 300
        logits = rng.standard_normal((n, 2)) * 2.0
        labels = rng.integers(0, 2, n)
        res = (np.argmax(logits, axis=1) != labels).astype(float)
        ids = np.array([f"r{i:04d}" for i in range(n)], dtype=object)
        curve_msr = rc_curve(res, msr(logits), ids)
        curve_pe = rc_curve(res, pe(logits), ids)
        assert np.array_equal(curve_msr.ordering, curve_pe.ordering)
        assert np.array_equal(curve_msr.risk, curve_pe.risk)
        assert aurc(curve_msr) == aurc(curve_pe)
