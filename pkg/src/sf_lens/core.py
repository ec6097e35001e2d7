"""Shared domain types: records, predictions, failure-detection outcomes.

Everything here is immutable after construction and safe to share across
workers. The classifier decision is always the argmax of the deterministic
logits (never an MCD aggregate), so all confidence channels of one model
score the same predictions; ties break to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

STUDY_KINDS = ("iid", "cor", "acq", "man")


class DetectionOutcome(str, Enum):
    """Failure-detection confusion cell at threshold tau.

    Positive means "failure flagged", i.e. confidence < tau. FN is the
    silent failure: a wrong prediction the CSF left confident.
    """

    TP = "TP"  # wrong prediction, confidence < tau
    FP = "FP"  # correct prediction, confidence < tau
    TN = "TN"  # correct prediction, confidence >= tau
    FN = "FN"  # wrong prediction, confidence >= tau (silent failure)


@dataclass(frozen=True)
class InferenceRecord:
    """One test case: model outputs plus ground truth and metadata."""

    id: str
    label: int
    logits: np.ndarray                      # (K,)
    latent: np.ndarray                      # (d,)
    mcd: Optional[np.ndarray] = None        # (T, K)
    ext_conf: dict[str, float] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)
    image_ref: Optional[str] = None


def predict(record: InferenceRecord) -> int:
    """Predicted class: argmax over logits, ties to the lowest index."""
    return int(np.argmax(record.logits))


def residual(record: InferenceRecord) -> int:
    """1 if the prediction misses the label, else 0."""
    return int(predict(record) != record.label)


def detection_outcome(record: InferenceRecord, confidence: float, tau: float) -> DetectionOutcome:
    """Classify one (prediction, confidence) pair against threshold tau."""
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    wrong = residual(record) == 1
    flagged = confidence < tau
    if wrong:
        return DetectionOutcome.TP if flagged else DetectionOutcome.FN
    return DetectionOutcome.FP if flagged else DetectionOutcome.TN


# Vectorized twins used by metrics and the service; semantics identical to
# the per-record functions above.

def predict_all(logits: np.ndarray) -> np.ndarray:
    """(n, K) logits -> (n,) predicted classes. np.argmax already takes the first maximum."""
    return np.argmax(logits, axis=1)


def residuals_all(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return (predict_all(logits) != labels).astype(np.int64)


def detection_outcomes_all(residuals: np.ndarray, confidences: np.ndarray, tau: float) -> np.ndarray:
    """(n,) array of outcome strings for a whole study."""
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    wrong = np.asarray(residuals).astype(bool)
    flagged = np.asarray(confidences) < tau
    out = np.where(
        wrong,
        np.where(flagged, DetectionOutcome.TP.value, DetectionOutcome.FN.value),
        np.where(flagged, DetectionOutcome.FP.value, DetectionOutcome.TN.value),
    )
    return out


def detection_counts(residuals: np.ndarray, confidences: np.ndarray, tau: float) -> dict[str, int]:
    """TP/FP/TN/FN counts; always partition len(residuals) exactly."""
    outcomes = detection_outcomes_all(residuals, confidences, tau)
    return {cell.value: int(np.sum(outcomes == cell.value)) for cell in DetectionOutcome}


def default_tau(confidences: np.ndarray, coverage: float = 0.95) -> float:
    """Threshold flagging the least-confident (1 - coverage) share of a study.

    The confusion coloring needs some tau; the convention here is the
    confidence value of the record sitting at the coverage boundary when
    records are ranked most-confident first. Records strictly below the
    returned value are flagged.
    """
    conf = np.asarray(confidences, dtype=np.float64)
    if conf.size == 0:
        raise ValueError("empty confidence vector")
    if not 0.0 < coverage <= 1.0:
        raise ValueError("coverage must be in (0, 1]")
    keep = max(1, int(np.ceil(coverage * conf.size)))
    return float(np.sort(conf)[::-1][keep - 1])
