// Mirror of the engine's FilterSpec and its query-string encoding.
// Multi-valued facets repeat their key; defaults are omitted so encoded
// URLs stay short and canonical.

export interface FilterSpec {
  labels: string[];
  predictions: string[];
  outcomes: string[];
  smart_tags: string[];
  data_actions: string[];
  confidence_min: number;
  confidence_max: number;
  substring: string;
  pipeline_id: string | null;
  postprocessed: boolean;
}

export const MULTI_KEYS = [
  "labels",
  "predictions",
  "outcomes",
  "smart_tags",
  "data_actions",
] as const;

export function emptyFilterSpec(): FilterSpec {
  return {
    labels: [],
    predictions: [],
    outcomes: [],
    smart_tags: [],
    data_actions: [],
    confidence_min: 0,
    confidence_max: 1,
    substring: "",
    pipeline_id: null,
    postprocessed: true,
  };
}

export function normalizeFilterSpec(spec: FilterSpec): FilterSpec {
  return {
    ...spec,
    labels: [...spec.labels].sort(),
    predictions: [...spec.predictions].sort(),
    outcomes: [...spec.outcomes].sort(),
    smart_tags: [...spec.smart_tags].sort(),
    data_actions: [...spec.data_actions].sort(),
  };
}

export function encodeFilterSpec(spec: FilterSpec, params?: URLSearchParams): URLSearchParams {
  const out = params ?? new URLSearchParams();
  const normalized = normalizeFilterSpec(spec);
  for (const key of MULTI_KEYS) {
    for (const value of normalized[key]) out.append(key, value);
  }
  if (normalized.confidence_min !== 0) out.set("confidence_min", String(normalized.confidence_min));
  if (normalized.confidence_max !== 1) out.set("confidence_max", String(normalized.confidence_max));
  if (normalized.substring) out.set("substring", normalized.substring);
  if (normalized.pipeline_id !== null) out.set("pipeline_id", normalized.pipeline_id);
  if (!normalized.postprocessed) out.set("postprocessed", "false");
  return out;
}

export function parseFilterSpec(params: URLSearchParams): FilterSpec {
  const spec = emptyFilterSpec();
  for (const key of MULTI_KEYS) {
    spec[key] = params.getAll(key).sort();
  }
  const lo = params.get("confidence_min");
  if (lo !== null) spec.confidence_min = Number(lo);
  const hi = params.get("confidence_max");
  if (hi !== null) spec.confidence_max = Number(hi);
  spec.substring = params.get("substring") ?? "";
  spec.pipeline_id = params.get("pipeline_id");
  spec.postprocessed = params.get("postprocessed") !== "false";
  return spec;
}

export function filterSpecsEqual(a: FilterSpec, b: FilterSpec): boolean {
  return (
    JSON.stringify(normalizeFilterSpec(a)) === JSON.stringify(normalizeFilterSpec(b))
  );
}
