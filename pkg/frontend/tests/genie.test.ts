import { describe, expect, it } from "vitest";

import {
  checkForm,
  pollTicket,
  recheckEntries,
  renderGenieResults,
  submitGenie,
  type GenieForm,
} from "../src/genie.js";
import type { GenieEntry } from "../src/types.js";
import { mockApi, report } from "./helpers.js";

function form(over: Partial<GenieForm> = {}): GenieForm {
  return {
    task: "tabular_classification",
    dataset_id: "d-blobs-tgt",
    deployment: "cloud",
    constraints: [{ metric: "accuracy", op: ">=", value: 0.9 }],
    targets: [{ metric: "latency_ms", direction: "minimize" }],
    top_k: 5,
    explore_budget: 9,
    ...over,
  };
}

function entry(accuracy: number, latency: number): GenieEntry {
  return {
    config: { tl_method: "fine_tune", base_model_id: "m-base", dataset_id: "d-blobs-tgt", lr: 0.01 },
    report: report({ accuracy, inference_latency_ms: latency }),
    provenance: "explored",
  };
}

describe("genie form", () => {
  it("disables submission with a hint when no target is set", () => {
    const check = checkForm(form({ targets: [] }));
    expect(check.ok).toBe(false);
    expect(check.hint).toContain("target");
  });

  it("accepts a complete form", () => {
    expect(checkForm(form()).ok).toBe(true);
  });
});

describe("client-side re-check", () => {
  it("renders only constraint-satisfying rows", () => {
    // UI contract: the client re-verifies the server payload
    const entries = [entry(0.95, 0.2), entry(0.85, 0.1), entry(0.92, 0.4)];
    const kept = recheckEntries(entries, [{ metric: "accuracy", op: ">=", value: 0.9 }]);
    expect(kept.map((e) => e.report.accuracy)).toEqual([0.95, 0.92]);
  });

  it("applies every constraint, both directions", () => {
    const entries = [entry(0.95, 0.2), entry(0.97, 5.0)];
    const kept = recheckEntries(entries, [
      { metric: "accuracy", op: ">=", value: 0.9 },
      { metric: "latency_ms", op: "<=", value: 1.0 },
    ]);
    expect(kept).toHaveLength(1);
    expect(kept[0].report.inference_latency_ms).toBe(0.2);
  });
});

describe("submission and polling", () => {
  it("returns results immediately when history suffices", async () => {
    const { api } = mockApi([
      {
        method: "POST", path: "/genie", status: 200,
        body: {
          status: "complete", ticket_id: null,
          recommendation: { entries: [entry(0.95, 0.2), entry(0.8, 0.1)], tl_method: "fine_tune", explored: false },
        },
      },
    ]);
    const phase = await submitGenie(api, form());
    expect(phase.kind).toBe("done");
    if (phase.kind === "done") {
      expect(phase.recommendation.entries).toHaveLength(1); // 0.8 dropped by re-check
      expect(phase.dropped).toBe(1);
    }
  });

  it("polls a ticket until the exploration completes", async () => {
    const { api } = mockApi([
      { method: "POST", path: "/genie", status: 200, body: { status: "pending", ticket_id: "g-1", recommendation: null } },
      {
        method: "GET", path: "/genie/g-1", status: 200,
        body: {
          ticket_id: "g-1", status: "complete", error: null,
          recommendation: { entries: [entry(0.93, 0.3)], tl_method: "fine_tune", explored: true },
        },
      },
    ]);
    const submitted = await submitGenie(api, form());
    expect(submitted.kind).toBe("polling");
    if (submitted.kind !== "polling") return;
    const done = await pollTicket(api, submitted.ticketId, form().constraints);
    expect(done.kind).toBe("done");
    if (done.kind === "done") {
      expect(done.recommendation.explored).toBe(true);
      expect(done.recommendation.entries).toHaveLength(1);
    }
  });

  it("surfaces a failed exploration ticket", async () => {
    const { api } = mockApi([
      {
        method: "GET", path: "/genie/g-bad", status: 200,
        body: { ticket_id: "g-bad", status: "failed", recommendation: null, error: "NoCandidateModels: none" },
      },
    ]);
    const phase = await pollTicket(api, "g-bad", []);
    expect(phase.kind).toBe("failed");
    if (phase.kind === "failed") expect(phase.message).toContain("NoCandidateModels");
  });
});

describe("results rendering", () => {
  it("renders a row per kept entry plus an expandable config row", () => {
    const phase = {
      kind: "done" as const,
      recommendation: { entries: [entry(0.95, 0.2), entry(0.93, 0.5)], tl_method: "fine_tune", explored: true },
      dropped: 0,
    };
    const html = renderGenieResults(phase);
    expect(html.match(/class="genie-row"/g)?.length).toBe(2);
    expect(html.match(/class="genie-config hidden"/g)?.length).toBe(2);
    expect(html).toContain("open-editor-btn");
  });

  it("notes hidden rows when the re-check dropped some", () => {
    const phase = {
      kind: "done" as const,
      recommendation: { entries: [entry(0.95, 0.2)], tl_method: "fine_tune", explored: false },
      dropped: 2,
    };
    expect(renderGenieResults(phase)).toContain("2 server row(s) failed the client-side re-check");
  });

  it("shows an empty state when nothing qualifies", () => {
    const phase = {
      kind: "done" as const,
      recommendation: { entries: [], tl_method: "fine_tune", explored: true },
      dropped: 0,
    };
    expect(renderGenieResults(phase)).toContain("No configuration satisfies");
  });
});
