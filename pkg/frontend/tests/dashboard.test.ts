import { describe, expect, it } from "vitest";

import { deepLink, qualityRows } from "../src/dashboard.js";
import { filterSpecsEqual, parseFilterSpec } from "../src/filterSpec.js";
import { ConfigPayload } from "../src/types.js";
import { parseState } from "../src/urlState.js";

const CONFIG: ConfigPayload = {
  project_name: "demo",
  classes: ["greeting", "weather", "distance"],
  rejection_class: "oos",
  seed: 42,
  splits: ["train", "eval"],
  pipelines: [{ id: "main", prediction_threshold: 0.5 }],
  thresholds: {},
  smart_tag_families: {
    extreme_length: ["long_sentence", "short_sentence"],
    dissimilar: ["no_close_train", "no_close_eval"],
  },
  proposed_actions: ["relabel", "remove", "no_action"],
  config_hash: "abc",
};

describe("dashboard quality table", () => {
  it("builds label, prediction, and tag-family rows", () => {
    const rows = qualityRows(CONFIG);
    const byGroup = (group: string) => rows.filter((r) => r.group === group);
    expect(byGroup("label").map((r) => r.name)).toEqual([
      "greeting",
      "weather",
      "distance",
      "oos",
    ]);
    expect(byGroup("prediction")).toHaveLength(4);
    expect(byGroup("tag_family").map((r) => r.name)).toEqual(["extreme_length", "dissimilar"]);
  });

  it("a label row's deep link carries exactly that subpopulation filter", () => {
    const rows = qualityRows(CONFIG);
    const distance = rows.find((r) => r.group === "label" && r.name === "distance")!;
    const url = deepLink(distance, "eval");
    const state = parseState(url.slice(1));
    expect(state.view).toBe("exploration");
    expect(state.split).toBe("eval");
    expect(filterSpecsEqual(state.filter, distance.filter)).toBe(true);
    expect(state.filter.labels).toEqual(["distance"]);
    expect(url).toContain("labels=distance");
  });

  it("a tag-family row ORs the family's tags together", () => {
    const rows = qualityRows(CONFIG);
    const family = rows.find((r) => r.group === "tag_family" && r.name === "extreme_length")!;
    const state = parseState(deepLink(family, "eval").slice(1));
    expect(state.filter.smart_tags).toEqual(["long_sentence", "short_sentence"]);
  });

  it("every quality row survives the URL round trip", () => {
    for (const row of qualityRows(CONFIG)) {
      const url = deepLink(row, "train");
      const reparsed = parseFilterSpec(new URLSearchParams(url.slice(1)));
      expect(filterSpecsEqual(reparsed, row.filter), row.name).toBe(true);
    }
  });
});
