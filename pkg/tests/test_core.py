import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sf_lens.core import (
    DetectionOutcome,
    InferenceRecord,
    default_tau,
    detection_counts,
    detection_outcome,
    predict,
    predict_all,
    residual,
    residuals_all,
)


def rec(logits, label=0):
    return InferenceRecord(id="r0", label=label,
                           logits=np.asarray(logits, dtype=np.float64),
                           latent=np.zeros(2))


class TestPredict:
    def test_argmax(self):
        assert predict(rec([2.0, 0.0])) == 0
        assert predict(rec([0.1, 0.2, 5.0])) == 2

    def test_tie_breaks_to_lowest_index(self):
        assert predict(rec([1.0, 1.0])) == 0
        assert predict(rec([3.0, 5.0, 5.0])) == 1

    def test_vectorized_matches_scalar(self, rng):
        logits = rng.standard_normal((50, 4))
        expected = [predict(rec(row)) for row in logits]
        assert predict_all(logits).tolist() == expected


class TestResidual:
    def test_correct_and_wrong(self):
        assert residual(rec([2.0, 0.0], label=0)) == 0
        assert residual(rec([0.0, 2.0], label=0)) == 1

    def test_tie_rule_applies(self):
        # tie predicts class 0, so label 1 is a miss
        assert residual(rec([1.0, 1.0], label=1)) == 1

    def test_mean_residual_is_error_rate(self, rng):
        logits = rng.standard_normal((200, 3))
        labels = rng.integers(0, 3, 200)
        res = residuals_all(logits, labels)
        acc = np.mean(predict_all(logits) == labels)
        assert set(np.unique(res)) <= {0, 1}
        assert np.mean(res) == pytest.approx(1.0 - acc)


class TestDetectionOutcome:
    def test_confident_correct_is_tn(self):
        assert detection_outcome(rec([2.0, 0.0], 0), 0.9, 0.5) == DetectionOutcome.TN

    def test_confident_wrong_is_silent_failure(self):
        assert detection_outcome(rec([0.0, 2.0], 0), 0.9, 0.5) == DetectionOutcome.FN

    def test_flagged_wrong_is_tp(self):
        assert detection_outcome(rec([0.0, 2.0], 0), 0.1, 0.5) == DetectionOutcome.TP

    def test_flagged_correct_is_fp(self):
        assert detection_outcome(rec([2.0, 0.0], 0), 0.1, 0.5) == DetectionOutcome.FP

    def test_non_finite_tau_rejected(self):
        with pytest.raises(ValueError):
            detection_outcome(rec([2.0, 0.0], 0), 0.9, float("nan"))

    @given(
        st.lists(st.tuples(st.integers(0, 1), st.floats(0, 1, allow_nan=False)),
                 min_size=1, max_size=60),
        st.floats(0, 1, allow_nan=False),
    )
    def test_counts_partition_n(self, pairs, tau):
        res = np.array([p[0] for p in pairs])
        conf = np.array([p[1] for p in pairs])
        counts = detection_counts(res, conf, tau)
        assert sum(counts.values()) == len(pairs)


class TestDefaultTau:
    def test_flags_bottom_five_percent(self):
        conf = np.arange(100, dtype=float)  # 0..99
        tau = default_tau(conf, coverage=0.95)
        flagged = int(np.sum(conf < tau))
        assert flagged == 5

    def test_single_record(self):
        assert default_tau(np.array([0.7])) == 0.7
