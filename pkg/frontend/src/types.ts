// API payload shapes; field names mirror the engine's JSON exactly.

export interface StatusPayload {
  project_name: string;
  config_hash: string;
  splits: Record<string, number>;
  pipelines: string[];
  startup: { module: string; split: string; pipeline_id: string | null; status: string; error: string | null }[];
  counts: Record<string, number>;
  ready: boolean;
}

export interface ConfigPayload {
  project_name: string;
  classes: string[];
  rejection_class: string;
  seed: number;
  splits: string[];
  pipelines: { id: string; prediction_threshold: number }[];
  thresholds: Record<string, number>;
  smart_tag_families: Record<string, string[]>;
  proposed_actions: string[];
  config_hash: string;
}

export interface WarningPayload {
  kind: string;
  severity: string;
  class: string | null;
  split: string | null;
  evidence: Record<string, number>;
}

export interface ClassMetrics {
  precision: number;
  recall: number;
  f1: number;
}

export interface MetricsPayload {
  accuracy: number;
  per_class: Record<string, ClassMetrics>;
  macro_f1: number;
  ece: number;
  outcome_counts: Record<string, number>;
  total: number;
  empty: boolean;
}

export interface UtteranceRow {
  id: number;
  text: string;
  label: string;
  prediction: string | null;
  top_confidence: number | null;
  outcome: string | null;
  smart_tags: string[];
  proposed_action: string;
}

export interface UtterancePage {
  total_count: number;
  offset: number;
  limit: number;
  rows: UtteranceRow[];
}

export interface StagePayload {
  top_class: string;
  top_confidence: number;
  ranked_classes: string[];
  outcome: string;
}

export interface NeighborPayload {
  id: number;
  similarity: number;
  text: string;
  label: string;
}

export interface BehavioralResultPayload {
  test_name: string;
  family: string;
  perturbed_text: string;
  original_class: string;
  perturbed_class: string;
  confidence_delta: number;
  passed: boolean;
}

export interface DetailPayload {
  id: number;
  split: string;
  text: string;
  label: string;
  proposed_action: string;
  smart_tags: string[];
  predictions: {
    pipeline_id: string;
    stages: { raw: StagePayload; postprocessed: StagePayload };
    probs: number[];
  } | null;
  neighbors: Record<string, NeighborPayload[]>;
  saliency: { tokens: string[]; scores: number[] } | null;
  behavioral: BehavioralResultPayload[];
}

export interface HistogramPayload {
  bin_edges: number[];
  correct: number[];
  incorrect: number[];
}

export interface ConfusionPayload {
  row_classes: string[];
  col_classes: string[];
  normalized: boolean;
  matrix: number[][];
}

export interface WordImportance {
  word: string;
  weight: number;
  support: number;
}

export interface TopWordsPayload {
  correct: WordImportance[];
  incorrect: WordImportance[];
}

export interface BehavioralSummaryPayload {
  available: boolean;
  families: Record<string, { failed: number; total: number; rate: number }>;
  tests: Record<string, { failed: number; total: number; rate: number; family: string }>;
}

export interface ThresholdPointPayload {
  threshold: number;
  accuracy: number;
  outcome_counts: Record<string, number>;
}
