// Client-side mirror of the draft schema. The unsaved edit buffer must pass
// this check before any save call goes out.

import type { DraftObj, GraphObj, NodeObj } from "./types.js";

export const KIND_ATTRS: Record<string, string[]> = {
  dense: ["in_features", "out_features", "bias"],
  relu: [],
  softmax: [],
  flatten: [],
  dropout: ["p"],
  conv2d: ["in_channels", "out_channels", "kernel", "stride", "padding"],
  maxpool2d: ["kernel", "stride"],
  identity: [],
};

export interface SchemaIssue {
  path: string;
  reason: string;
}

function checkNode(node: NodeObj, path: string, issues: SchemaIssue[]): void {
  if (!node.id) issues.push({ path: `${path}/id`, reason: "node id required" });
  const required = KIND_ATTRS[node.kind];
  if (required === undefined) {
    issues.push({ path: `${path}/kind`, reason: `unknown kind ${node.kind}` });
    return;
  }
  for (const key of required) {
    if (!(key in node.attrs)) {
      issues.push({ path: `${path}/attrs/${key}`, reason: "required attribute missing" });
    }
  }
  for (const key of Object.keys(node.attrs)) {
    if (!required.includes(key)) {
      issues.push({ path: `${path}/attrs/${key}`, reason: `attribute not allowed for ${node.kind}` });
    }
  }
  if (node.kind === "dropout") {
    const p = node.attrs["p"];
    if (typeof p !== "number" || p < 0 || p > 1) {
      issues.push({ path: `${path}/attrs/p`, reason: "p must lie in [0, 1]" });
    }
  }
  for (const key of required) {
    if (key === "p" || key === "bias" || key === "padding") continue;
    const value = node.attrs[key];
    if (value !== undefined && (!Number.isInteger(value) || value <= 0)) {
      issues.push({ path: `${path}/attrs/${key}`, reason: "must be a positive integer" });
    }
  }
}

export function checkGraph(graph: GraphObj, path = "/graph"): SchemaIssue[] {
  const issues: SchemaIssue[] = [];
  if (!Array.isArray(graph.input_shape) || graph.input_shape.length === 0) {
    issues.push({ path: `${path}/input_shape`, reason: "input shape required" });
  }
  if (!Array.isArray(graph.nodes) || graph.nodes.length === 0) {
    issues.push({ path: `${path}/nodes`, reason: "at least one node required" });
    return issues;
  }
  const ids = new Set<string>();
  graph.nodes.forEach((node, i) => {
    if (ids.has(node.id)) issues.push({ path: `${path}/nodes/${i}/id`, reason: "duplicate id" });
    ids.add(node.id);
    checkNode(node, `${path}/nodes/${i}`, issues);
  });
  graph.edges.forEach((edge, i) => {
    if (!ids.has(edge[0]) || !ids.has(edge[1])) {
      issues.push({ path: `${path}/edges/${i}`, reason: "edge references a missing node" });
    }
  });
  return issues;
}

export function checkDraft(draft: DraftObj): SchemaIssue[] {
  const issues: SchemaIssue[] = [];
  if (draft.schema_version !== "1") {
    issues.push({ path: "/schema_version", reason: "unsupported schema version" });
  }
  if (typeof draft.revision !== "number" || draft.revision < 0) {
    issues.push({ path: "/revision", reason: "revision must be a non-negative integer" });
  }
  issues.push(...checkGraph(draft.graph));
  return issues;
}
