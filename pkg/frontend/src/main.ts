// Entry point: routes on the URL query string, which carries the whole
// view state; navigation pushes history entries so every view is a link.

import { ApiClient } from "./api.js";
import { renderDashboard } from "./dashboard.js";
import { renderDetail } from "./detail.js";
import { VersionGate, renderExploration } from "./exploration.js";
import { ConfigPayload } from "./types.js";
import { parseState } from "./urlState.js";

const api = new ApiClient("");
const gate = new VersionGate();
let cachedConfig: ConfigPayload | null = null;

function toast(message: string): void {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  document.body.append(node);
  setTimeout(() => node.remove(), 4000);
}

async function getConfig(): Promise<ConfigPayload> {
  if (!cachedConfig) cachedConfig = await api.config();
  return cachedConfig;
}

function navigate(query: string): void {
  history.pushState(null, "", query || "?");
  void render();
}

async function render(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const state = parseState(location.search);
  try {
    if (state.view === "dashboard") {
      await renderDashboard(root, api, navigate, state.split);
    } else if (state.view === "detail" && state.utteranceId !== null) {
      await renderDetail(root, state, api, await getConfig(), navigate, toast);
    } else {
      await renderExploration(root, state, { api, config: await getConfig(), navigate, toast }, gate);
    }
  } catch (error) {
    root.textContent = `failed to render: ${String(error)}`;
  }
}

window.addEventListener("popstate", () => void render());
void render();
