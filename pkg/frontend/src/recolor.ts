/** Client-side failure-detection re-bucketing for the tau slider.
 *
 * This is the one computation the UI performs locally (round-tripping per
 * slider tick is too slow); it must match the server's
 * /api/embedding?scheme=csf-confusion labels exactly for the same tau.
 * Server semantics: a record is flagged iff confidence < tau; a flagged
 * wrong prediction is TP, an unflagged wrong one is FN (the silent
 * failure), flagged correct is FP, unflagged correct TN.
 */

import type { DetectionOutcome } from "./types.js";

export function detectionOutcome(
  correct: boolean,
  confidence: number,
  tau: number,
): DetectionOutcome {
  if (!Number.isFinite(tau)) throw new RangeError("tau must be finite");
  const flagged = confidence < tau;
  if (correct) return flagged ? "FP" : "TN";
  return flagged ? "TP" : "FN";
}

export function rebucket(
  predictions: ArrayLike<number>,
  trueLabels: ArrayLike<number>,
  confidence: ArrayLike<number>,
  tau: number,
): DetectionOutcome[] {
  const n = predictions.length;
  if (trueLabels.length !== n || confidence.length !== n) {
    throw new RangeError("predictions, labels and confidence must have equal length");
  }
  const out = new Array<DetectionOutcome>(n);
  for (let i = 0; i < n; i++) {
    out[i] = detectionOutcome(predictions[i] === trueLabels[i], confidence[i], tau);
  }
  return out;
}

/** TP/FP/TN/FN totals; always partition the record count. */
export function outcomeCounts(outcomes: DetectionOutcome[]): Record<DetectionOutcome, number> {
  const counts: Record<DetectionOutcome, number> = { TP: 0, FP: 0, TN: 0, FN: 0 };
  for (const o of outcomes) counts[o]++;
  return counts;
}
