// Exploration space: control panel plus three tabs (performance,
// confusion matrix, utterances). Control edits rewrite the URL state and
// refetch; stale responses are discarded by version.

import { ApiClient, ApiError } from "./api.js";
import { clear, el, formatNumber, formatPercent } from "./dom.js";
import { FilterSpec } from "./filterSpec.js";
import {
  ConfigPayload,
  ConfusionPayload,
  HistogramPayload,
  MetricsPayload,
  TopWordsPayload,
  UtterancePage,
  UtteranceRow,
} from "./types.js";
import { ExplorationState, Tab, encodeState } from "./urlState.js";

export class VersionGate {
  private version = 0;

  next(): number {
    return ++this.version;
  }

  isCurrent(token: number): boolean {
    return token === this.version;
  }
}

export function applyOptimisticAction(
  rows: UtteranceRow[],
  id: number,
  value: string,
): { rows: UtteranceRow[]; previous: string | null } {
  let previous: string | null = null;
  const next = rows.map((row) => {
    if (row.id !== id) return row;
    previous = row.proposed_action;
    return { ...row, proposed_action: value };
  });
  return { rows: next, previous };
}

const OUTCOMES = [
  "CorrectAndPredicted",
  "CorrectAndRejected",
  "IncorrectAndPredicted",
  "IncorrectAndRejected",
];

interface ExplorationDeps {
  api: ApiClient;
  config: ConfigPayload;
  navigate: (query: string) => void;
  toast: (message: string) => void;
}

export async function renderExploration(
  root: HTMLElement,
  state: ExplorationState,
  deps: ExplorationDeps,
  gate: VersionGate,
): Promise<void> {
  const token = gate.next();
  const { api, config, navigate } = deps;
  clear(root);

  const setState = (patch: Partial<ExplorationState>) => {
    navigate(`?${encodeState({ ...state, ...patch, view: "exploration" })}`);
  };
  const setFilter = (patch: Partial<FilterSpec>) => {
    setState({ filter: { ...state.filter, ...patch }, offset: 0 });
  };

  root.append(
    el(
      "header",
      { class: "page-header" },
      el("h1", {}, "Exploration"),
      el("button", { class: "link-button", onclick: () => navigate("?") }, "back to dashboard"),
    ),
  );

  const layout = el("div", { class: "exploration-layout" });
  const panel = controlPanel(state, config, setState, setFilter);
  const content = el("div", { class: "tab-content" });
  const tabs = tabBar(state.tab, (tab) => setState({ tab }));
  layout.append(panel, el("div", { class: "tab-area" }, tabs, content));
  root.append(layout);

  try {
    if (state.tab === "performance") {
      const [metrics, histogram, words] = await Promise.all([
        api.metrics(state.split, state.filter),
        api.histogram(state.split, state.filter),
        api.topWords(state.split, state.filter, 20).catch(() => null),
      ]);
      if (!gate.isCurrent(token)) return;
      content.append(metricsCards(metrics), histogramChart(histogram));
      if (words) content.append(wordLists(words));
    } else if (state.tab === "confusion_matrix") {
      const confusion = await api.confusion(state.split, state.filter, true);
      if (!gate.isCurrent(token)) return;
      content.append(confusionTable(confusion));
    } else {
      const page = await api.utterances(state.split, state.filter, {
        sortField: state.sortField,
        descending: state.descending,
        offset: state.offset,
        limit: state.limit,
      });
      if (!gate.isCurrent(token)) return;
      content.append(utteranceTable(page, state, deps, setState));
    }
  } catch (error) {
    if (!gate.isCurrent(token)) return;
    content.append(
      el("div", { class: "error-banner" }, `Failed to load: ${String(error)}`),
    );
  }
}

function tabBar(active: Tab, onSelect: (tab: Tab) => void): HTMLElement {
  const bar = el("div", { class: "tabs" });
  const entries: [Tab, string][] = [
    ["performance", "Performance"],
    ["confusion_matrix", "Confusion matrix"],
    ["utterances", "Utterances"],
  ];
  for (const [tab, title] of entries) {
    bar.append(
      el(
        "button",
        {
          class: `tab-button${tab === active ? " active" : ""}`,
          onclick: () => onSelect(tab),
        },
        title,
      ),
    );
  }
  return bar;
}

function facetGroup(
  title: string,
  values: string[],
  selected: string[],
  onToggle: (value: string, checked: boolean) => void,
): HTMLElement {
  const group = el("details", { class: "facet-group" }, el("summary", {}, title));
  for (const value of values) {
    const checkbox = el("input", { type: "checkbox" }) as HTMLInputElement;
    checkbox.checked = selected.includes(value);
    checkbox.addEventListener("change", () => onToggle(value, checkbox.checked));
    group.append(el("label", { class: "facet-option" }, checkbox, value));
  }
  if (selected.length > 0) group.setAttribute("open", "");
  return group;
}

function toggled(current: string[], value: string, checked: boolean): string[] {
  const set = new Set(current);
  if (checked) set.add(value);
  else set.delete(value);
  return [...set].sort();
}

function controlPanel(
  state: ExplorationState,
  config: ConfigPayload,
  setState: (patch: Partial<ExplorationState>) => void,
  setFilter: (patch: Partial<FilterSpec>) => void,
): HTMLElement {
  const filter = state.filter;
  const panel = el("aside", { class: "control-panel" }, el("h2", {}, "Filters"));

  const splitSelect = el("select", {}) as HTMLSelectElement;
  for (const split of config.splits) {
    const option = el("option", { value: split }, split) as HTMLOptionElement;
    option.selected = split === state.split;
    splitSelect.append(option);
  }
  splitSelect.addEventListener("change", () => setState({ split: splitSelect.value, offset: 0 }));
  panel.append(el("label", { class: "control-row" }, "split ", splitSelect));

  if (config.pipelines.length > 1) {
    const pipelineSelect = el("select", {}) as HTMLSelectElement;
    for (const pipeline of config.pipelines) {
      const option = el("option", { value: pipeline.id }, pipeline.id) as HTMLOptionElement;
      option.selected = pipeline.id === (filter.pipeline_id ?? config.pipelines[0].id);
      pipelineSelect.append(option);
    }
    pipelineSelect.addEventListener("change", () =>
      setFilter({ pipeline_id: pipelineSelect.value }),
    );
    panel.append(el("label", { class: "control-row" }, "pipeline ", pipelineSelect));
  }

  const postprocessed = el("input", { type: "checkbox" }) as HTMLInputElement;
  postprocessed.checked = filter.postprocessed;
  postprocessed.addEventListener("change", () =>
    setFilter({ postprocessed: postprocessed.checked }),
  );
  panel.append(el("label", { class: "control-row" }, postprocessed, " post-processed"));

  const substring = el("input", {
    type: "search",
    placeholder: "text contains...",
    value: filter.substring,
  }) as HTMLInputElement;
  substring.addEventListener("change", () => setFilter({ substring: substring.value }));
  panel.append(el("div", { class: "control-row" }, substring));

  const confidenceRow = el("div", { class: "control-row confidence-row" }, "confidence ");
  const lo = el("input", { type: "number", min: "0", max: "1", step: "0.05", value: String(filter.confidence_min) }) as HTMLInputElement;
  const hi = el("input", { type: "number", min: "0", max: "1", step: "0.05", value: String(filter.confidence_max) }) as HTMLInputElement;
  const applyConfidence = () =>
    setFilter({ confidence_min: Number(lo.value), confidence_max: Number(hi.value) });
  lo.addEventListener("change", applyConfidence);
  hi.addEventListener("change", applyConfidence);
  confidenceRow.append(lo, " to ", hi);
  panel.append(confidenceRow);

  const classes = [...config.classes, config.rejection_class];
  panel.append(
    facetGroup("labels", classes, filter.labels, (value, checked) =>
      setFilter({ labels: toggled(filter.labels, value, checked) }),
    ),
    facetGroup("predictions", classes, filter.predictions, (value, checked) =>
      setFilter({ predictions: toggled(filter.predictions, value, checked) }),
    ),
    facetGroup("outcomes", OUTCOMES, filter.outcomes, (value, checked) =>
      setFilter({ outcomes: toggled(filter.outcomes, value, checked) }),
    ),
  );
  for (const [family, tags] of Object.entries(config.smart_tag_families)) {
    panel.append(
      facetGroup(`tags: ${family}`, tags, filter.smart_tags, (value, checked) =>
        setFilter({ smart_tags: toggled(filter.smart_tags, value, checked) }),
      ),
    );
  }
  panel.append(
    facetGroup("proposed actions", config.proposed_actions, filter.data_actions, (value, checked) =>
      setFilter({ data_actions: toggled(filter.data_actions, value, checked) }),
    ),
  );
  return panel;
}

function metricsCards(metrics: MetricsPayload): HTMLElement {
  const cards = el("div", { class: "metric-cards" });
  const entries: [string, string][] = [
    ["utterances", String(metrics.total)],
    ["accuracy", formatPercent(metrics.accuracy)],
    ["macro F1", formatPercent(metrics.macro_f1)],
    ["ECE", formatNumber(metrics.ece)],
  ];
  for (const [name, value] of entries) {
    cards.append(
      el("div", { class: "metric-card" }, el("div", { class: "metric-value" }, value), el("div", { class: "metric-name" }, name)),
    );
  }
  const outcomes = el("div", { class: "outcome-strip" });
  for (const outcome of OUTCOMES) {
    outcomes.append(
      el(
        "span",
        { class: `outcome-chip outcome-${outcome}` },
        `${outcome}: ${metrics.outcome_counts[outcome] ?? 0}`,
      ),
    );
  }
  cards.append(outcomes);
  return cards;
}

function histogramChart(histogram: HistogramPayload): HTMLElement {
  const chart = el("div", { class: "histogram" }, el("h3", {}, "Confidence"));
  const bars = el("div", { class: "histogram-bars" });
  const max = Math.max(1, ...histogram.correct.map((c, i) => c + histogram.incorrect[i]));
  for (let i = 0; i < histogram.correct.length; i++) {
    const total = histogram.correct[i] + histogram.incorrect[i];
    const bar = el("div", {
      class: "histogram-bar",
      title: `${histogram.bin_edges[i].toFixed(2)}-${histogram.bin_edges[i + 1].toFixed(2)}: ${histogram.correct[i]} correct, ${histogram.incorrect[i]} incorrect`,
    });
    const wrong = el("div", { class: "bar-incorrect" });
    wrong.style.height = `${(100 * histogram.incorrect[i]) / max}%`;
    const right = el("div", { class: "bar-correct" });
    right.style.height = `${(100 * histogram.correct[i]) / max}%`;
    bar.append(wrong, right);
    if (total === 0) bar.classList.add("bar-empty");
    bars.append(bar);
  }
  chart.append(bars, el("div", { class: "histogram-axis" }, "0", el("span", {}, "top confidence"), "1"));
  return chart;
}

function wordLists(words: TopWordsPayload): HTMLElement {
  const container = el("div", { class: "word-lists" });
  const sections: [string, TopWordsPayload["correct"], string][] = [
    ["important words · correct", words.correct, "correct"],
    ["important words · incorrect", words.incorrect, "incorrect"],
  ];
  for (const [title, list, kind] of sections) {
    const section = el("div", { class: `word-list word-${kind}` }, el("h3", {}, title));
    const max = Math.max(1e-12, ...list.map((w) => w.weight));
    for (const word of list) {
      const bar = el("div", { class: "word-bar" });
      bar.style.width = `${Math.max(4, (100 * word.weight) / max)}%`;
      section.append(
        el(
          "div",
          { class: "word-row", title: `weight ${word.weight.toFixed(4)} over ${word.support} utterances` },
          el("span", { class: "word-text" }, word.word),
          bar,
        ),
      );
    }
    if (list.length === 0) section.append(el("p", { class: "empty-state" }, "none"));
    container.append(section);
  }
  return container;
}

// three-level severity shading for off-diagonal confusion mass
export function confusionSeverity(value: number, isDiagonal: boolean): 0 | 1 | 2 | 3 {
  if (isDiagonal || value === 0) return 0;
  if (value < 0.05) return 1;
  if (value < 0.25) return 2;
  return 3;
}

function confusionTable(confusion: ConfusionPayload): HTMLElement {
  const table = el("table", { class: "confusion-table" });
  const head = el("tr", {}, el("th", {}, "label \\ predicted"));
  for (const cls of confusion.col_classes) head.append(el("th", { class: "rotated" }, cls));
  table.append(head);
  confusion.matrix.forEach((row, i) => {
    const tr = el("tr", {}, el("th", {}, confusion.row_classes[i]));
    row.forEach((value, j) => {
      const severity = confusionSeverity(value, i === j);
      tr.append(
        el(
          "td",
          { class: `confusion-cell severity-${severity}${i === j ? " diagonal" : ""}` },
          value === 0 ? "" : confusion.normalized ? value.toFixed(2) : String(value),
        ),
      );
    });
    table.append(tr);
  });
  return el("div", { class: "confusion-wrap" }, table);
}

function utteranceTable(
  page: UtterancePage,
  state: ExplorationState,
  deps: ExplorationDeps,
  setState: (patch: Partial<ExplorationState>) => void,
): HTMLElement {
  const { api, config, navigate, toast } = deps;
  const container = el("div", { class: "utterance-table" });
  container.append(
    el(
      "div",
      { class: "table-meta" },
      `${page.total_count} matching utterances`,
      sortControl(state, setState),
    ),
  );
  const table = el(
    "table",
    {},
    el(
      "tr",
      {},
      el("th", {}, "id"),
      el("th", {}, "text"),
      el("th", {}, "label"),
      el("th", {}, "prediction"),
      el("th", {}, "conf"),
      el("th", {}, "smart tags"),
      el("th", {}, "proposed action"),
    ),
  );
  for (const row of page.rows) {
    const actionSelect = el("select", { class: "action-select" }) as HTMLSelectElement;
    for (const action of config.proposed_actions) {
      const option = el("option", { value: action }, action) as HTMLOptionElement;
      option.selected = action === row.proposed_action;
      actionSelect.append(option);
    }
    actionSelect.addEventListener("change", async () => {
      const previous = row.proposed_action;
      row.proposed_action = actionSelect.value; // optimistic
      try {
        await api.setProposedAction(state.split, row.id, actionSelect.value);
      } catch (error) {
        row.proposed_action = previous; // revert
        actionSelect.value = previous;
        toast(
          error instanceof ApiError
            ? `rejected: ${error.message}`
            : `request failed: ${String(error)}`,
        );
      }
    });
    actionSelect.addEventListener("click", (event) => event.stopPropagation());
    const tr = el(
      "tr",
      {
        class: `utterance-row outcome-${row.outcome ?? "none"}`,
        onclick: () =>
          navigate(
            `?${encodeState({ ...state, view: "detail", utteranceId: row.id })}`,
          ),
      },
      el("td", {}, String(row.id)),
      el("td", { class: "utterance-text" }, row.text),
      el("td", {}, row.label),
      el("td", {}, row.prediction ?? "-"),
      el("td", {}, row.top_confidence === null ? "-" : formatPercent(row.top_confidence)),
      el("td", { class: "tag-cell" }, row.smart_tags.join(", ")),
      el("td", {}, actionSelect),
    );
    table.append(tr);
  }
  container.append(table, pager(page, state, setState));
  return container;
}

function sortControl(
  state: ExplorationState,
  setState: (patch: Partial<ExplorationState>) => void,
): HTMLElement {
  const select = el("select", {}) as HTMLSelectElement;
  for (const field of ["id", "top_confidence", "label", "prediction"]) {
    const option = el("option", { value: field }, `sort: ${field}`) as HTMLOptionElement;
    option.selected = field === state.sortField;
    select.append(option);
  }
  select.addEventListener("change", () =>
    setState({ sortField: select.value as ExplorationState["sortField"], offset: 0 }),
  );
  const direction = el(
    "button",
    { onclick: () => setState({ descending: !state.descending }) },
    state.descending ? "desc" : "asc",
  );
  return el("span", { class: "sort-control" }, select, direction);
}

function pager(
  page: UtterancePage,
  state: ExplorationState,
  setState: (patch: Partial<ExplorationState>) => void,
): HTMLElement {
  const previous = el(
    "button",
    { onclick: () => setState({ offset: Math.max(0, state.offset - state.limit) }) },
    "previous",
  ) as HTMLButtonElement;
  previous.disabled = state.offset === 0;
  const next = el(
    "button",
    { onclick: () => setState({ offset: state.offset + state.limit }) },
    "next",
  ) as HTMLButtonElement;
  next.disabled = state.offset + state.limit >= page.total_count;
  const span = `${page.total_count === 0 ? 0 : state.offset + 1}-${Math.min(
    state.offset + state.limit,
    page.total_count,
  )} of ${page.total_count}`;
  return el("div", { class: "pager" }, previous, el("span", {}, span), next);
}
