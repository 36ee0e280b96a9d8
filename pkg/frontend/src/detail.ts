// Utterance detail page: saliency-highlighted text, staged predictions,
// neighbors against each split, behavioral test results, and the
// editable proposed action.

import { ApiClient, ApiError } from "./api.js";
import { clear, el, formatPercent } from "./dom.js";
import { ConfigPayload, DetailPayload, StagePayload } from "./types.js";
import { ExplorationState, encodeState } from "./urlState.js";

export function saliencyOpacity(score: number, maxScore: number): number {
  if (maxScore <= 0) return 0;
  return Math.min(1, 0.15 + 0.85 * (score / maxScore));
}

function saliencyText(detail: DetailPayload): HTMLElement {
  if (!detail.saliency || detail.saliency.tokens.length === 0) {
    return el("p", { class: "detail-text" }, detail.text);
  }
  const container = el("p", { class: "detail-text saliency-text" });
  const max = Math.max(...detail.saliency.scores, 0);
  detail.saliency.tokens.forEach((token, i) => {
    const score = detail.saliency!.scores[i] ?? 0;
    const span = el("span", {
      class: "saliency-token",
      title: `saliency ${score.toFixed(4)}`,
    }, token);
    span.style.backgroundColor = `rgba(122, 162, 255, ${saliencyOpacity(score, max).toFixed(3)})`;
    container.append(span, " ");
  });
  return container;
}

function stageCard(name: string, stage: StagePayload): HTMLElement {
  return el(
    "div",
    { class: "stage-card" },
    el("h4", {}, name),
    el("div", {}, `prediction: ${stage.top_class}`),
    el("div", {}, `confidence: ${formatPercent(stage.top_confidence)}`),
    el("div", {}, `outcome: ${stage.outcome}`),
    el("div", { class: "ranked" }, `top classes: ${stage.ranked_classes.join(" > ")}`),
  );
}

export async function renderDetail(
  root: HTMLElement,
  state: ExplorationState,
  api: ApiClient,
  config: ConfigPayload,
  navigate: (query: string) => void,
  toast: (message: string) => void,
): Promise<void> {
  clear(root);
  root.append(
    el(
      "header",
      { class: "page-header" },
      el("h1", {}, `Utterance ${state.utteranceId} · ${state.split}`),
      el(
        "button",
        {
          class: "link-button",
          onclick: () => navigate(`?${encodeState({ ...state, view: "exploration", utteranceId: null })}`),
        },
        "back to exploration",
      ),
    ),
  );

  let detail: DetailPayload;
  try {
    detail = await api.detail(state.split, state.utteranceId ?? -1, state.filter.pipeline_id);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      root.append(el("div", { class: "panel" }, el("h2", {}, "Not found"), el("p", {}, error.message)));
      return;
    }
    root.append(el("div", { class: "error-banner" }, String(error)));
    return;
  }

  const actionSelect = el("select", {}) as HTMLSelectElement;
  for (const action of config.proposed_actions) {
    const option = el("option", { value: action }, action) as HTMLOptionElement;
    option.selected = action === detail.proposed_action;
    actionSelect.append(option);
  }
  actionSelect.addEventListener("change", async () => {
    const previous = detail.proposed_action;
    detail.proposed_action = actionSelect.value;
    try {
      await api.setProposedAction(detail.split, detail.id, actionSelect.value);
    } catch (error) {
      detail.proposed_action = previous;
      actionSelect.value = previous;
      toast(error instanceof ApiError ? `rejected: ${error.message}` : String(error));
    }
  });

  const main = el(
    "section",
    { class: "panel" },
    saliencyText(detail),
    el("div", { class: "detail-meta" },
      el("span", { class: "chip" }, `label: ${detail.label}`),
      ...detail.smart_tags.map((tag) => el("span", { class: "chip tag-chip" }, tag)),
    ),
    el("label", { class: "control-row" }, "proposed action ", actionSelect),
  );
  root.append(main);

  if (detail.predictions) {
    root.append(
      el(
        "section",
        { class: "panel" },
        el("h2", {}, `Predictions (${detail.predictions.pipeline_id})`),
        el(
          "div",
          { class: "stage-row" },
          stageCard("raw model output", detail.predictions.stages.raw),
          stageCard("after thresholding", detail.predictions.stages.postprocessed),
        ),
      ),
    );
  }

  for (const [split, neighbors] of Object.entries(detail.neighbors)) {
    const panel = el("section", { class: "panel" }, el("h2", {}, `Similar in ${split}`));
    const table = el(
      "table",
      {},
      el("tr", {}, el("th", {}, "similarity"), el("th", {}, "text"), el("th", {}, "label")),
    );
    for (const neighbor of neighbors.slice(0, 10)) {
      table.append(
        el(
          "tr",
          {},
          el("td", {}, neighbor.similarity.toFixed(3)),
          el("td", {}, neighbor.text),
          el("td", {}, neighbor.label),
        ),
      );
    }
    panel.append(table);
    root.append(panel);
  }

  if (detail.behavioral.length > 0) {
    const panel = el("section", { class: "panel" }, el("h2", {}, "Behavioral tests"));
    const table = el(
      "table",
      {},
      el(
        "tr",
        {},
        el("th", {}, "test"),
        el("th", {}, "perturbed text"),
        el("th", {}, "prediction"),
        el("th", {}, "Δ confidence"),
        el("th", {}, "result"),
      ),
    );
    for (const result of detail.behavioral) {
      table.append(
        el(
          "tr",
          { class: result.passed ? "test-passed" : "test-failed" },
          el("td", {}, result.test_name),
          el("td", {}, result.perturbed_text),
          el("td", {}, `${result.original_class} -> ${result.perturbed_class}`),
          el("td", {}, (result.confidence_delta >= 0 ? "+" : "") + result.confidence_delta.toFixed(3)),
          el("td", {}, result.passed ? "pass" : "FAIL"),
        ),
      );
    }
    panel.append(table);
    root.append(panel);
  }
}
