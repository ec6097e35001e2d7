/** Stable palettes per coloring scheme. */

import type { DetectionOutcome } from "./types.js";

// failure-detection cells: silent failures (FN) get the alarm color
export const OUTCOME_COLORS: Record<DetectionOutcome, string> = {
  TN: "#4daf7c",
  FP: "#a87c4f",
  TP: "#5a9bd4",
  FN: "#e03131",
};

const CATEGORICAL = [
  "#2cb5ae", "#7a5195", "#ef5675", "#ffa600", "#374c80",
  "#59a14f", "#edc948", "#b07aa1", "#9c755f", "#bab0ac",
];

/** Deterministic color per label: outcome palette when applicable, else categorical by first-seen order. */
export function colorFor(label: string, seen: Map<string, string>): string {
  const outcome = OUTCOME_COLORS[label as DetectionOutcome];
  if (outcome) return outcome;
  let color = seen.get(label);
  if (!color) {
    color = CATEGORICAL[seen.size % CATEGORICAL.length];
    seen.set(label, color);
  }
  return color;
}

export function hexToRgb01(hex: string): [number, number, number] {
  const v = parseInt(hex.slice(1), 16);
  return [((v >> 16) & 0xff) / 255, ((v >> 8) & 0xff) / 255, (v & 0xff) / 255];
}
