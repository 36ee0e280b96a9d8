// Dashboard: warnings plus a quality table broken down by label,
// prediction, and smart-tag family. Each row deep-links into the
// exploration space with the row's subpopulation filter pre-applied.

import { ApiClient } from "./api.js";
import { clear, el, formatPercent } from "./dom.js";
import { FilterSpec, emptyFilterSpec } from "./filterSpec.js";
import { ConfigPayload, MetricsPayload, WarningPayload } from "./types.js";
import { ExplorationState, defaultState, encodeState } from "./urlState.js";

export interface QualityRow {
  group: "label" | "prediction" | "tag_family";
  name: string;
  filter: FilterSpec;
}

// Rows of the dashboard quality table: one per label, per predicted
// class (rejection class included), and per smart-tag family (tags of a
// family OR together, so the family row is their union).
export function qualityRows(config: ConfigPayload): QualityRow[] {
  const rows: QualityRow[] = [];
  const labels = [...config.classes, config.rejection_class];
  for (const label of labels) {
    rows.push({ group: "label", name: label, filter: { ...emptyFilterSpec(), labels: [label] } });
  }
  for (const predicted of labels) {
    rows.push({
      group: "prediction",
      name: predicted,
      filter: { ...emptyFilterSpec(), predictions: [predicted] },
    });
  }
  for (const [family, tags] of Object.entries(config.smart_tag_families)) {
    rows.push({
      group: "tag_family",
      name: family,
      filter: { ...emptyFilterSpec(), smart_tags: [...tags] },
    });
  }
  return rows;
}

export function deepLink(row: QualityRow, split: string): string {
  const state: ExplorationState = {
    ...defaultState(),
    view: "exploration",
    split,
    tab: "utterances",
    filter: row.filter,
  };
  return `?${encodeState(state)}`;
}

function warningCard(warning: WarningPayload): HTMLElement {
  const evidence = Object.entries(warning.evidence)
    .map(([key, value]) => `${key}=${Number.isInteger(value) ? value : value.toFixed(3)}`)
    .join("  ");
  return el(
    "div",
    { class: `warning-card severity-${warning.severity}` },
    el("span", { class: "warning-kind" }, warning.kind),
    el(
      "span",
      { class: "warning-target" },
      [warning.class, warning.split].filter(Boolean).join(" @ ") || "dataset",
    ),
    el("span", { class: "warning-evidence" }, evidence),
  );
}

export async function renderDashboard(
  root: HTMLElement,
  api: ApiClient,
  navigate: (query: string) => void,
  split: string,
): Promise<void> {
  clear(root);
  let status;
  try {
    status = await api.status();
  } catch (error) {
    root.append(errorBanner(String(error), () => renderDashboard(root, api, navigate, split)));
    return;
  }
  if (!status.ready) {
    root.append(progressView(status));
    return;
  }

  const [config, warnings] = await Promise.all([api.config(), api.warnings()]);
  const header = el(
    "header",
    { class: "page-header" },
    el("h1", {}, config.project_name),
    el(
      "p",
      { class: "subtitle" },
      `${Object.entries(status.splits)
        .map(([name, count]) => `${name}: ${count}`)
        .join("  ·  ")}  ·  pipelines: ${status.pipelines.join(", ") || "none"}`,
    ),
  );

  const warningsPanel = el("section", { class: "panel" }, el("h2", {}, "Warnings"));
  if (warnings.warnings.length === 0) {
    warningsPanel.append(el("p", { class: "empty-state" }, "No dataset warnings."));
  } else {
    for (const warning of warnings.warnings) warningsPanel.append(warningCard(warning));
  }

  const table = el(
    "table",
    { class: "quality-table" },
    el(
      "thead",
      {},
      el(
        "tr",
        {},
        el("th", {}, "subpopulation"),
        el("th", {}, "utterances"),
        el("th", {}, "accuracy"),
        el("th", {}, "incorrect"),
      ),
    ),
  );
  const body = el("tbody", {});
  table.append(body);
  const qualityPanel = el(
    "section",
    { class: "panel" },
    el("h2", {}, `Quality on ${split}`),
    table,
  );

  root.append(header, warningsPanel, qualityPanel);

  const rows = qualityRows(config);
  const metricsList = await Promise.all(
    rows.map((row) =>
      api.metrics(split, row.filter).catch((): MetricsPayload | null => null),
    ),
  );
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i];
    const metrics = metricsList[i];
    if (!metrics || metrics.total === 0) continue;
    const incorrect =
      (metrics.outcome_counts["IncorrectAndPredicted"] ?? 0) +
      (metrics.outcome_counts["IncorrectAndRejected"] ?? 0);
    const tr = el(
      "tr",
      {
        class: `quality-row group-${row.group}`,
        onclick: () => navigate(deepLink(row, split)),
      },
      el("td", {}, el("span", { class: "group-chip" }, row.group), ` ${row.name}`),
      el("td", {}, String(metrics.total)),
      el("td", {}, formatPercent(metrics.accuracy)),
      el("td", {}, String(incorrect)),
    );
    body.append(tr);
  }
}

export function progressView(status: { counts: Record<string, number>; startup: { module: string; split: string; status: string }[] }): HTMLElement {
  const panel = el("section", { class: "panel" }, el("h2", {}, "Preparing analyses"));
  const counts = Object.entries(status.counts)
    .map(([state, count]) => `${state}: ${count}`)
    .join("  ·  ");
  panel.append(el("p", {}, counts || "starting"));
  for (const task of status.startup) {
    panel.append(
      el(
        "div",
        { class: `task-row task-${task.status}` },
        `${task.module} / ${task.split}`,
        el("span", { class: "task-status" }, task.status),
      ),
    );
  }
  return panel;
}

export function errorBanner(message: string, retry: () => void): HTMLElement {
  return el(
    "div",
    { class: "error-banner" },
    `Request failed: ${message} `,
    el("button", { onclick: retry }, "retry"),
  );
}
