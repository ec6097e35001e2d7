"""Silent-failure mining, corruption-intensity sweeps, and failure locality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..bundle.io import InferenceBundle
from ..csf import compute_channel
from ..errors import MissingTagError, MissingVariantError
from .kmeans import kmeans

SWEEP_LEVELS = (1, 2, 3, 4, 5)

BORDER = "border"
OPPOSING_CENTER = "opposing_center"
OUTLIER = "outlier"


@dataclass(frozen=True)
class FailureHit:
    id: str
    confidence: float
    prediction: int
    label: int
    image_ref: Optional[str]


def mine_silent_failures(bundle: InferenceBundle, run_idx: int, indices: np.ndarray,
                         channel: str, top: int = 2) -> list[FailureHit]:
    """Most-confident misclassifications of a scope, ranked confidence descending.

    Ties break by ascending id. Returns at most `top` hits; an all-correct
    scope yields an empty list.
    """
    run = bundle.runs[run_idx]
    preds = np.argmax(run.logits[indices], axis=1)
    labels = run.labels[indices]
    wrong = np.flatnonzero(preds != labels)
    if wrong.size == 0:
        return []
    conf = compute_channel(run, channel, bundle.manifest.K)[indices][wrong]
    ids = run.ids[indices][wrong]
    order = sorted(range(wrong.size), key=lambda i: (-conf[i], str(ids[i])))
    hits = []
    for i in order[:top]:
        gi = indices[wrong[i]]
        rid = str(run.ids[gi])
        image = None
        if bundle.manifest.image_dir is not None:
            image = f"{bundle.manifest.image_dir}/{rid}.png"
        hits.append(FailureHit(
            id=rid,
            confidence=float(conf[i]),
            prediction=int(preds[wrong[i]]),
            label=int(labels[wrong[i]]),
            image_ref=image,
        ))
    return hits


@dataclass(frozen=True)
class SweepPoint:
    level: int
    prediction: int
    confidence: float
    record_id: str


def intensity_sweep(bundle: InferenceBundle, run_idx: int, record_id: str,
                    kind: str, channel: str) -> list[SweepPoint]:
    """Prediction and confidence of one case across corruption levels 0..5.

    Level 0 is the uncorrupted record itself; levels 1..5 are looked up via
    the origin_id / shift_kind / intensity tags and must all be present.
    """
    run = bundle.runs[run_idx]
    for tag in ("origin_id", "shift_kind", "intensity"):
        if tag not in run.meta:
            raise MissingTagError(tag)
    conf_all = compute_channel(run, channel, bundle.manifest.K)
    preds_all = np.argmax(run.logits, axis=1)

    base = np.flatnonzero(run.ids == record_id)
    if base.size == 0:
        raise MissingVariantError(0)
    points = [SweepPoint(0, int(preds_all[base[0]]), float(conf_all[base[0]]), record_id)]

    variant_mask = (run.meta["origin_id"] == record_id) & (run.meta["shift_kind"] == kind)
    by_level = {}
    for i in np.flatnonzero(variant_mask):
        by_level[int(run.meta["intensity"][i])] = i
    for level in SWEEP_LEVELS:
        if level not in by_level:
            raise MissingVariantError(level)
        i = by_level[level]
        points.append(SweepPoint(level, int(preds_all[i]), float(conf_all[i]), str(run.ids[i])))
    return points


def failure_locality(coords: np.ndarray, labels: np.ndarray,
                     failure_indices: Sequence[int], predictions: np.ndarray,
                     centers_per_class: int = 1, seed: int = 0) -> list[str]:
    """Classify each failure's position in the embedded class geometry.

    outlier: farther from every class center than the 95th percentile of
    member-to-own-center distances. opposing_center: nearest center belongs
    to the predicted class and the failure sits below that class's median
    member distance. Everything else is border.
    """
    classes = np.unique(labels)
    class_centers: dict[int, np.ndarray] = {}
    for c in classes:
        members = coords[labels == c]
        k = min(centers_per_class, members.shape[0])
        class_centers[int(c)] = kmeans(members, k=k, seed=seed).centers

    def dist_to_class(point: np.ndarray, c: int) -> float:
        diff = class_centers[c] - point
        return float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff, optimize=False))))

    own_dist = np.array([dist_to_class(coords[i], int(labels[i])) for i in range(len(labels))])
    outlier_cut = float(np.percentile(own_dist, 95.0))
    median_by_class = {int(c): float(np.median(own_dist[labels == c])) for c in classes}

    out = []
    for i in failure_indices:
        point = coords[i]
        dists = {int(c): dist_to_class(point, int(c)) for c in classes}
        nearest = min(dists, key=lambda c: (dists[c], c))
        pred = int(predictions[i])
        if min(dists.values()) > outlier_cut:
            out.append(OUTLIER)
        elif nearest == pred and dists[pred] < median_by_class[pred]:
            out.append(OPPOSING_CENTER)
        else:
            out.append(BORDER)
    return out
