// Layered left-to-right placement for the graph canvas: column = longest
// path from the source, row = order of appearance within the column.

import type { GraphObj } from "./types.js";

export interface NodePosition {
  id: string;
  column: number;
  row: number;
  x: number;
  y: number;
}

export interface GraphLayout {
  positions: Map<string, NodePosition>;
  edges: { from: string; to: string }[];
  columns: number;
  rows: number;
}

export const CELL_W = 168;
export const CELL_H = 92;

export function layoutGraph(graph: GraphObj): GraphLayout {
  const indegree = new Map<string, number>();
  const successors = new Map<string, string[]>();
  for (const node of graph.nodes) {
    indegree.set(node.id, 0);
    successors.set(node.id, []);
  }
  for (const [from, to] of graph.edges) {
    indegree.set(to, (indegree.get(to) ?? 0) + 1);
    successors.get(from)?.push(to);
  }

  const depth = new Map<string, number>();
  const ready = graph.nodes.filter((n) => (indegree.get(n.id) ?? 0) === 0).map((n) => n.id);
  ready.forEach((id) => depth.set(id, 0));
  const queue = [...ready];
  while (queue.length) {
    const id = queue.shift()!;
    for (const next of successors.get(id) ?? []) {
      depth.set(next, Math.max(depth.get(next) ?? 0, (depth.get(id) ?? 0) + 1));
      indegree.set(next, (indegree.get(next) ?? 1) - 1);
      if (indegree.get(next) === 0) queue.push(next);
    }
  }

  const rowsPerColumn = new Map<number, number>();
  const positions = new Map<string, NodePosition>();
  for (const node of graph.nodes) {
    const column = depth.get(node.id) ?? 0;
    const row = rowsPerColumn.get(column) ?? 0;
    rowsPerColumn.set(column, row + 1);
    positions.set(node.id, {
      id: node.id,
      column,
      row,
      x: 24 + column * CELL_W,
      y: 24 + row * CELL_H,
    });
  }
  return {
    positions,
    edges: graph.edges.map(([from, to]) => ({ from, to })),
    columns: Math.max(0, ...[...positions.values()].map((p) => p.column)) + 1,
    rows: Math.max(1, ...rowsPerColumn.values()),
  };
}
