import { describe, expect, it } from "vitest";

import { checkDraft, checkGraph } from "../src/schema.js";
import { chainGraph, draftObj } from "./helpers.js";

describe("client draft schema", () => {
  it("accepts a well-formed draft", () => {
    expect(checkDraft(draftObj())).toEqual([]);
  });

  it("rejects missing required attributes with a path", () => {
    const graph = chainGraph();
    graph.nodes[0].attrs = { in_features: 16 } as never;
    const issues = checkGraph(graph);
    expect(issues.some((i) => i.path.includes("attrs/out_features"))).toBe(true);
  });

  it("rejects unknown kinds and extra attributes", () => {
    const graph = chainGraph();
    graph.nodes[1] = { ...graph.nodes[1], kind: "conv9d" };
    expect(checkGraph(graph).some((i) => i.reason.includes("unknown kind"))).toBe(true);

    const extra = chainGraph();
    extra.nodes[0].attrs = { ...extra.nodes[0].attrs, surprise: 3 };
    expect(checkGraph(extra).some((i) => i.path.includes("surprise"))).toBe(true);
  });

  it("rejects dropout probability outside [0, 1]", () => {
    const graph = chainGraph();
    graph.nodes.splice(1, 0, {
      id: "p0", name: "drop", kind: "dropout", attrs: { p: 1.5 }, frozen: false,
    });
    expect(checkGraph(graph).some((i) => i.path.includes("attrs/p"))).toBe(true);
  });

  it("rejects dangling edges and wrong schema versions", () => {
    const graph = chainGraph();
    graph.edges.push(["d1", "ghost"]);
    expect(checkGraph(graph).some((i) => i.reason.includes("missing node"))).toBe(true);
    expect(checkDraft(draftObj({ schema_version: "9" }))[0].path).toBe("/schema_version");
  });
});
