// The URL query string is the complete view state: any view can be
// reproduced by pasting its URL into a fresh session.

import {
  FilterSpec,
  emptyFilterSpec,
  encodeFilterSpec,
  filterSpecsEqual,
  parseFilterSpec,
} from "./filterSpec.js";

export type View = "dashboard" | "exploration" | "detail";
export type Tab = "performance" | "confusion_matrix" | "utterances";
export type SortField = "id" | "top_confidence" | "label" | "prediction";

export interface ExplorationState {
  view: View;
  split: string;
  utteranceId: number | null;
  tab: Tab;
  filter: FilterSpec;
  sortField: SortField;
  descending: boolean;
  offset: number;
  limit: number;
}

export const DEFAULT_SPLIT = "eval";
export const DEFAULT_LIMIT = 20;

export function defaultState(): ExplorationState {
  return {
    view: "dashboard",
    split: DEFAULT_SPLIT,
    utteranceId: null,
    tab: "performance",
    filter: emptyFilterSpec(),
    sortField: "id",
    descending: false,
    offset: 0,
    limit: DEFAULT_LIMIT,
  };
}

const VIEWS: View[] = ["dashboard", "exploration", "detail"];
const TABS: Tab[] = ["performance", "confusion_matrix", "utterances"];
const SORT_FIELDS: SortField[] = ["id", "top_confidence", "label", "prediction"];

export function encodeState(state: ExplorationState): string {
  const params = new URLSearchParams();
  if (state.view !== "dashboard") params.set("view", state.view);
  if (state.split !== DEFAULT_SPLIT) params.set("split", state.split);
  if (state.utteranceId !== null) params.set("utterance_id", String(state.utteranceId));
  if (state.tab !== "performance") params.set("tab", state.tab);
  encodeFilterSpec(state.filter, params);
  if (state.sortField !== "id") params.set("sort", state.sortField);
  if (state.descending) params.set("descending", "true");
  if (state.offset !== 0) params.set("offset", String(state.offset));
  if (state.limit !== DEFAULT_LIMIT) params.set("limit", String(state.limit));
  return params.toString();
}

export function parseState(query: string): ExplorationState {
  const params = new URLSearchParams(query);
  const state = defaultState();
  const view = params.get("view");
  if (view && (VIEWS as string[]).includes(view)) state.view = view as View;
  state.split = params.get("split") ?? DEFAULT_SPLIT;
  const utterance = params.get("utterance_id");
  state.utteranceId = utterance !== null ? Number(utterance) : null;
  const tab = params.get("tab");
  if (tab && (TABS as string[]).includes(tab)) state.tab = tab as Tab;
  state.filter = parseFilterSpec(params);
  const sort = params.get("sort");
  if (sort && (SORT_FIELDS as string[]).includes(sort)) state.sortField = sort as SortField;
  state.descending = params.get("descending") === "true";
  state.offset = Number(params.get("offset") ?? "0");
  state.limit = Number(params.get("limit") ?? String(DEFAULT_LIMIT));
  return state;
}

export function statesEqual(a: ExplorationState, b: ExplorationState): boolean {
  return (
    a.view === b.view &&
    a.split === b.split &&
    a.utteranceId === b.utteranceId &&
    a.tab === b.tab &&
    filterSpecsEqual(a.filter, b.filter) &&
    a.sortField === b.sortField &&
    a.descending === b.descending &&
    a.offset === b.offset &&
    a.limit === b.limit
  );
}
