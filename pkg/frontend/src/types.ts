/** Payload types of the sf-lens HTTP API. */

export type DetectionOutcome = "TP" | "FP" | "TN" | "FN";

export type ColorScheme = "class" | "domain" | "classifier-confusion" | "csf-confusion";

export interface DatasetSummary {
  name: string;
  n: number;
  K: number;
  T: number;
  d: number;
  runs: number;
  channels: string[];
  studies: string[];
  has_images: boolean;
}

export interface StudySummary {
  name: string;
  kind: "iid" | "cor" | "acq" | "man";
  size: number;
}

export interface MetricRow {
  study: string;
  kind: string;
  channel: string;
  run: string;
  aurc: number;
  eaurc: number;
  f_auroc: number | null;
  accuracy: number;
}

export interface RcCurve {
  coverage: number[];
  risk: number[];
  study: string;
  channel: string;
  run: number;
}

export interface EmbeddingParams {
  pca_dims: number;
  perplexity: number;
  iterations: number;
  seed: number;
  theta: number;
}

export const DEFAULT_EMBEDDING_PARAMS: EmbeddingParams = {
  pca_dims: 50,
  perplexity: 30,
  iterations: 1000,
  seed: 0,
  theta: 0.5,
};

export interface EmbedJob {
  key: string;
  status: "running" | "done" | string;
}

export interface EmbeddingFrame {
  key: string;
  ids: string[];
  coords: [number, number, number][];
  labels: string[];
  predictions: number[];
  true_labels: number[];
  confidence: number[] | null;
  scheme: ColorScheme;
  tau: number | null;
  kl_trace: [number, number][];
}

export interface ConceptClusters {
  concept: string;
  centers: [number, number, number][];
  representative_ids: string[];
  sizes: number[];
  member_ids: string[][];
}

export interface FailureHit {
  id: string;
  confidence: number;
  prediction: number;
  label: number;
  image_ref: string | null;
}

export interface SweepPoint {
  level: number;
  prediction: number;
  confidence: number;
  record_id: string;
}
