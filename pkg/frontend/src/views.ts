/** Pure view models for the explorer panels; DOM binding lives in app.ts. */

import type { ConceptClusters, EmbeddingFrame, FailureHit, SweepPoint } from "./types.js";

export interface RecordDetail {
  id: string;
  prediction: number;
  label: number;
  confidence: number | null;
  imageUrl: string;
}

/** What the panel shows when a dot is selected: the image link plus the
 * (prediction, label, confidence) triple, straight from fetched arrays. */
export function recordDetail(
  frame: EmbeddingFrame,
  index: number,
  imageUrl: (id: string) => string,
): RecordDetail {
  if (index < 0 || index >= frame.ids.length) {
    throw new RangeError(`record index ${index} out of range`);
  }
  const id = frame.ids[index];
  return {
    id,
    prediction: frame.predictions[index],
    label: frame.true_labels[index],
    confidence: frame.confidence ? frame.confidence[index] : null,
    imageUrl: imageUrl(id),
  };
}

export interface ConceptTile {
  recordId: string;
  imageUrl: string;
  clusterIndex: number;
  size: number;
  memberIds: string[];
}

/** One tile per cluster, in server order; never invents blanks for small concepts. */
export function conceptTiles(
  clusters: ConceptClusters,
  imageUrl: (id: string) => string,
): ConceptTile[] {
  return clusters.representative_ids.map((recordId, i) => ({
    recordId,
    imageUrl: imageUrl(recordId),
    clusterIndex: i,
    size: clusters.sizes[i],
    memberIds: clusters.member_ids[i],
  }));
}

export interface FailureRow {
  id: string;
  prediction: number;
  label: number;
  imageUrl: string | null;
  /** channel name -> confidence, the browser's side-by-side CSF comparison */
  confidences: Record<string, number>;
}

export function failureRows(
  hits: FailureHit[],
  confidenceByChannel: Record<string, Map<string, number>>,
  imageUrl: (id: string) => string,
): FailureRow[] {
  return hits.map((hit) => {
    const confidences: Record<string, number> = {};
    for (const [channel, perId] of Object.entries(confidenceByChannel)) {
      const value = perId.get(hit.id);
      if (value !== undefined) confidences[channel] = value;
    }
    return {
      id: hit.id,
      prediction: hit.prediction,
      label: hit.label,
      imageUrl: hit.image_ref ? imageUrl(hit.id) : null,
      confidences,
    };
  });
}

/** Deterministic toggleable ordering for the failure table. */
export function sortRows(
  rows: FailureRow[],
  channel: string,
  descending: boolean,
): FailureRow[] {
  const sorted = [...rows].sort((a, b) => {
    const ca = a.confidences[channel] ?? -Infinity;
    const cb = b.confidences[channel] ?? -Infinity;
    if (ca !== cb) return descending ? cb - ca : ca - cb;
    return a.id < b.id ? -1 : a.id > b.id ? 1 : 0; // ties by id, stable either way
  });
  return sorted;
}

export interface SweepItem {
  level: number;
  prediction: number;
  confidence: number;
  imageUrl: string;
  /** prediction differs from level 0: the corruption flipped the decision */
  flipped: boolean;
}

export function sweepStrip(
  points: SweepPoint[],
  imageUrl: (id: string) => string,
): SweepItem[] {
  const base = points.find((p) => p.level === 0);
  const basePrediction = base ? base.prediction : NaN;
  return [...points]
    .sort((a, b) => a.level - b.level)
    .map((p) => ({
      level: p.level,
      prediction: p.prediction,
      confidence: p.confidence,
      imageUrl: imageUrl(p.record_id),
      flipped: p.prediction !== basePrediction,
    }));
}
