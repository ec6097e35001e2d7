"""Risk-coverage analysis and scalar metrics.

AURC is the discrete mean of the selective risk over the n one-by-one
filtering steps (rank records most-confident first, risk(j) = errors among
the top j divided by j), reported in percent. Ties in confidence break by
ascending record id so curves are fully reproducible. Family aggregates
(cor/acq/man) are unweighted means over member studies, and everything is
averaged over training runs last.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .bundle.io import InferenceBundle
from .core import default_tau, detection_counts
from .errors import DegenerateStudyError, EmptyStudyError
from .studies import StudyDefinition

AGGREGATE_KINDS = ("cor", "acq", "man")
RUN_MEAN = "mean"


@dataclass(frozen=True)
class RiskCoverageCurve:
    coverage: np.ndarray   # (n,) j/n for j = 1..n
    risk: np.ndarray       # (n,) errors-among-top-j / j
    ordering: np.ndarray   # record ids (or indices) in rank order

    @property
    def n(self) -> int:
        return len(self.risk)

    @property
    def final_risk(self) -> float:
        return float(self.risk[-1])


def _rank_order(confidences: np.ndarray, ids: Optional[np.ndarray]) -> np.ndarray:
    """Positions sorted by confidence descending, ties by ascending id."""
    conf = np.asarray(confidences, dtype=np.float64)
    n = conf.size
    if ids is None:
        id_rank = np.arange(n)
    else:
        id_rank = np.empty(n, dtype=np.int64)
        id_rank[np.argsort(np.asarray(ids), kind="stable")] = np.arange(n)
    return np.lexsort((id_rank, -conf))


def rc_curve(
    residuals: np.ndarray,
    confidences: np.ndarray,
    ids: Optional[np.ndarray] = None,
) -> RiskCoverageCurve:
    res = np.asarray(residuals, dtype=np.float64)
    conf = np.asarray(confidences, dtype=np.float64)
    if res.size == 0:
        raise EmptyStudyError()
    if res.shape != conf.shape:
        raise ValueError("residuals and confidences must have equal length")
    order = _rank_order(conf, ids)
    n = res.size
    steps = np.arange(1, n + 1, dtype=np.float64)
    risk = np.cumsum(res[order]) / steps
    ordering = (np.asarray(ids)[order] if ids is not None else order).copy()
    return RiskCoverageCurve(coverage=steps / n, risk=risk, ordering=ordering)


def aurc(curve: RiskCoverageCurve) -> float:
    """Area under the risk-coverage curve in percent: 100 * mean over filtering steps."""
    return 100.0 * float(np.mean(curve.risk))


def optimal_aurc(residuals: np.ndarray) -> float:
    """AURC of the oracle ranking: every correct record ahead of every error."""
    res = np.asarray(residuals, dtype=np.float64)
    if res.size == 0:
        raise EmptyStudyError()
    n = res.size
    n_correct = n - int(np.sum(res))
    steps = np.arange(1, n + 1, dtype=np.float64)
    cum_err = np.clip(steps - n_correct, 0.0, None)
    return 100.0 * float(np.mean(cum_err / steps))


def eaurc(curve: RiskCoverageCurve) -> float:
    """Excess AURC over the oracle ranking of the same residuals; >= 0 always."""
    errors = np.round(curve.risk * np.arange(1, curve.n + 1)).astype(np.int64)
    residuals = np.diff(errors, prepend=0)
    return aurc(curve) - optimal_aurc(residuals)


def aurc_scores(
    residuals: np.ndarray,
    confidences: np.ndarray,
    ids: Optional[np.ndarray] = None,
) -> tuple[float, float]:
    """(aurc, eaurc) without re-deriving residuals from the curve."""
    curve = rc_curve(residuals, confidences, ids)
    a = aurc(curve)
    return a, a - optimal_aurc(residuals)


def failure_auroc(residuals: np.ndarray, confidences: np.ndarray) -> float:
    """Probability a random correct record outranks a random error; ties count half."""
    res = np.asarray(residuals).astype(bool)
    conf = np.asarray(confidences, dtype=np.float64)
    n_wrong = int(res.sum())
    n_right = res.size - n_wrong
    if n_wrong == 0 or n_right == 0:
        raise DegenerateStudyError("failure AUROC needs both correct and incorrect records")
    ranks = rankdata(conf, method="average")
    u = float(np.sum(ranks[~res])) - n_right * (n_right + 1) / 2.0
    return u / (n_right * n_wrong)


def bootstrap_ci(
    residuals: np.ndarray,
    confidences: np.ndarray,
    B: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile 2.5/97.5 interval for AURC over B record-level resamples."""
    if B < 1:
        raise ValueError("B must be >= 1")
    res = np.asarray(residuals, dtype=np.float64)
    conf = np.asarray(confidences, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n = res.size
    values = np.empty(B)
    for b in range(B):
        idx = rng.integers(0, n, n)
        values[b] = aurc(rc_curve(res[idx], conf[idx]))
    lo, hi = np.percentile(values, [2.5, 97.5])
    return float(lo), float(hi)


def thin_curve(curve: RiskCoverageCurve, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Step-interpolated (coverage, risk) at `points` evenly spaced coverages."""
    if points < 1:
        raise ValueError("points must be >= 1")
    n = curve.n
    cov = np.arange(1, points + 1, dtype=np.float64) / points
    j = np.maximum(1, np.ceil(cov * n).astype(np.int64))
    return cov, curve.risk[j - 1]


# --- bundle-level evaluation -------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    study: str
    kind: str
    channel: str
    run: str        # "0", "1", ... or "mean"
    aurc: float
    eaurc: float
    f_auroc: float
    accuracy: float


@dataclass
class MetricReport:
    rows: list[MetricRow] = field(default_factory=list)

    def filtered(self, study=None, channel=None, run=None) -> list[MetricRow]:
        out = self.rows
        if study is not None:
            out = [r for r in out if r.study == study]
        if channel is not None:
            out = [r for r in out if r.channel == channel]
        if run is not None:
            out = [r for r in out if r.run == run]
        return out

    def lookup(self, study: str, channel: str, run: str = RUN_MEAN) -> MetricRow:
        matches = self.filtered(study, channel, run)
        if not matches:
            raise KeyError(f"no report row for ({study}, {channel}, {run})")
        return matches[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["study", "kind", "channel", "run", "aurc", "eaurc", "f_auroc", "accuracy"])
        for r in self.rows:
            w.writerow(
                [r.study, r.kind, r.channel, r.run,
                 f"{r.aurc:.6f}", f"{r.eaurc:.6f}", f"{r.f_auroc:.6f}", f"{r.accuracy:.6f}"]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([r.__dict__ for r in self.rows], indent=2, sort_keys=True)


def _nan_or(fn, *args) -> float:
    try:
        return float(fn(*args))
    except DegenerateStudyError:
        return float("nan")


def evaluate(
    bundle: InferenceBundle,
    studies: Sequence[StudyDefinition],
    channels: Sequence[str],
) -> MetricReport:
    """Per (study, channel, run) scalars plus run means and family aggregates."""
    from .csf import compute_channel

    manifest = bundle.manifest
    rows: list[MetricRow] = []
    per_run: dict[tuple[str, str], list[MetricRow]] = {}

    for study in studies:
        study.validate_tags(list(manifest.tag_names) + ["class", "pred", "correct"])
        for r, run in enumerate(bundle.runs):
            idx = study.select(run.columns())
            if idx.size == 0:
                raise EmptyStudyError(study.name)
            residuals = bundle.residuals(r)[idx]
            ids = run.ids[idx]
            for channel in channels:
                conf = compute_channel(run, channel, manifest.K)[idx]
                curve = rc_curve(residuals, conf, ids)
                a = aurc(curve)
                row = MetricRow(
                    study=study.name,
                    kind=study.kind,
                    channel=channel,
                    run=str(r),
                    aurc=a,
                    eaurc=a - optimal_aurc(residuals),
                    f_auroc=_nan_or(failure_auroc, residuals, conf),
                    accuracy=1.0 - curve.final_risk,
                )
                rows.append(row)
                per_run.setdefault((study.name, channel), []).append(row)

    # run means
    kind_members: dict[str, list[str]] = {}
    mean_rows: dict[tuple[str, str], MetricRow] = {}
    for study in studies:
        kind_members.setdefault(study.kind, [])
        if study.name not in kind_members[study.kind]:
            kind_members[study.kind].append(study.name)
        for channel in channels:
            members = per_run[(study.name, channel)]
            row = MetricRow(
                study=study.name,
                kind=study.kind,
                channel=channel,
                run=RUN_MEAN,
                aurc=float(np.mean([m.aurc for m in members])),
                eaurc=float(np.mean([m.eaurc for m in members])),
                f_auroc=float(np.mean([m.f_auroc for m in members])),
                accuracy=float(np.mean([m.accuracy for m in members])),
            )
            rows.append(row)
            mean_rows[(study.name, channel)] = row

    # family aggregates over member studies, per channel, at run-mean level
    for kind in AGGREGATE_KINDS:
        members = kind_members.get(kind, [])
        if not members:
            continue
        for channel in channels:
            group = [mean_rows[(s, channel)] for s in members]
            rows.append(
                MetricRow(
                    study=kind,
                    kind=kind,
                    channel=channel,
                    run=RUN_MEAN,
                    aurc=float(np.mean([g.aurc for g in group])),
                    eaurc=float(np.mean([g.eaurc for g in group])),
                    f_auroc=float(np.mean([g.f_auroc for g in group])),
                    accuracy=float(np.mean([g.accuracy for g in group])),
                )
            )
    return MetricReport(rows=rows)


def confusion_report(
    bundle: InferenceBundle,
    studies: Sequence[StudyDefinition],
    channels: Sequence[str],
    tau: Optional[float] = None,
) -> list[dict]:
    """Failure-detection confusion counts per (study, channel, run).

    tau defaults per cell to the confidence at 95% coverage of that study.
    The four counts always partition the study size.
    """
    from .csf import compute_channel

    out = []
    for study in studies:
        for r, run in enumerate(bundle.runs):
            idx = study.select(run.columns())
            if idx.size == 0:
                raise EmptyStudyError(study.name)
            residuals = bundle.residuals(r)[idx]
            for channel in channels:
                conf = compute_channel(run, channel, bundle.manifest.K)[idx]
                t = default_tau(conf) if tau is None else float(tau)
                counts = detection_counts(residuals, conf, t)
                out.append(
                    {
                        "study": study.name,
                        "kind": study.kind,
                        "channel": channel,
                        "run": str(r),
                        "tau": t,
                        **counts,
                        "n": int(idx.size),
                    }
                )
    return out


def curve_to_csv(coverage: np.ndarray, risk: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coverage", "risk"])
    for c, r in zip(coverage, risk):
        w.writerow([f"{c:.10g}", f"{r:.10g}"])
    return buf.getvalue()
