// Editor state machine.
//
// Edits mutate the local buffer optimistically and are confirmed by server
// re-validation; a rejection restores the previous buffer and pins the
// server's error text on the offending node. Shapes always come from the
// server (single source of truth). Saves carry the draft revision; a
// stale-revision rejection opens the conflict dialog instead of clobbering
// someone else's save.

import { ApiError, type ApiClient } from "./api.js";
import { checkDraft } from "./schema.js";
import type { DraftObj, GraphObj, NodeObj, Report } from "./types.js";

export interface ConflictState {
  latestRevision: number;
  message: string;
}

export interface EditorState {
  draftId: string | null;
  buffer: DraftObj;
  shapes: Record<string, number[]>;
  nodeErrors: Record<string, string>;
  banner: string | null;
  conflict: ConflictState | null;
  report: Report | null;
  validating: boolean;
  dirty: boolean;
}

export function initialEditorState(
  draftId: string | null,
  draft: DraftObj,
  shapes: Record<string, number[]>,
): EditorState {
  return {
    draftId,
    buffer: draft,
    shapes,
    nodeErrors: {},
    banner: null,
    conflict: null,
    report: null,
    validating: false,
    dirty: false,
  };
}

export function draftFromModel(
  modelId: string,
  author: string,
  graph: GraphObj,
  pendingConfig: Record<string, unknown> = {},
): DraftObj {
  return {
    schema_version: "1",
    base_model_id: modelId,
    revision: 0,
    author,
    graph: JSON.parse(JSON.stringify(graph)) as GraphObj,
    pending_config: pendingConfig,
  };
}

function withGraph(buffer: DraftObj, graph: GraphObj): DraftObj {
  return { ...buffer, graph };
}

export function setNodeAttr(graph: GraphObj, nodeId: string, key: string, value: number): GraphObj {
  return {
    ...graph,
    nodes: graph.nodes.map((n): NodeObj =>
      n.id === nodeId ? { ...n, attrs: { ...n.attrs, [key]: value } } : n,
    ),
    edges: graph.edges,
  };
}

export function setFrozen(graph: GraphObj, nodeId: string, frozen: boolean): GraphObj {
  return {
    ...graph,
    nodes: graph.nodes.map((n): NodeObj => (n.id === nodeId ? { ...n, frozen } : n)),
    edges: graph.edges,
  };
}

/** Optimistic edit + server confirmation. On rejection the previous buffer
 *  is restored and the server's message lands on the offending node. */
export async function applyGraphEdit(
  api: ApiClient,
  state: EditorState,
  nextGraph: GraphObj,
  editedNodeId: string,
): Promise<EditorState> {
  const candidate = withGraph(state.buffer, nextGraph);
  try {
    const result = await api.validateGraph(nextGraph);
    return {
      ...state,
      buffer: candidate,
      shapes: result.shapes,
      nodeErrors: {},
      banner: null,
      dirty: true,
    };
  } catch (err) {
    if (err instanceof ApiError && err.payload) {
      const nodeId = (err.detail["node_id"] as string | undefined) ?? editedNodeId;
      return {
        ...state, // buffer untouched: the edit is reverted
        nodeErrors: { ...state.nodeErrors, [nodeId]: err.payload.error.message },
      };
    }
    return { ...state, banner: String(err) };
  }
}

/** Save the buffer; the revision check turns concurrent edits into an
 *  explicit conflict dialog. */
export async function saveDraft(api: ApiClient, state: EditorState): Promise<EditorState> {
  const issues = checkDraft(state.buffer);
  if (issues.length > 0) {
    return { ...state, banner: `draft does not validate: ${issues[0].path}: ${issues[0].reason}` };
  }
  try {
    const saved = await api.saveDraft(state.buffer, state.draftId);
    return {
      ...state,
      draftId: saved.draft_id,
      buffer: { ...state.buffer, revision: saved.revision },
      conflict: null,
      banner: `saved as ${saved.draft_id} (revision ${saved.revision})`,
      dirty: false,
    };
  } catch (err) {
    if (err instanceof ApiError && err.code === "stale_revision") {
      return {
        ...state,
        conflict: {
          latestRevision: (err.detail["stored"] as number) ?? -1,
          message: err.payload!.error.message,
        },
      };
    }
    if (err instanceof ApiError && err.payload) {
      return { ...state, banner: err.payload.error.message };
    }
    return { ...state, banner: String(err) };
  }
}

/** Conflict resolution: reload the latest revision, drop local changes. */
export async function reloadLatest(api: ApiClient, state: EditorState): Promise<EditorState> {
  if (!state.draftId) return { ...state, conflict: null };
  const view = await api.getDraft(state.draftId);
  return initialEditorState(state.draftId, view.draft, view.shapes);
}

export async function runValidation(
  api: ApiClient,
  state: EditorState,
  config: Record<string, unknown>,
  budgetS: number | null,
): Promise<EditorState> {
  try {
    const report = await api.validate(config, budgetS);
    return { ...state, report, validating: false, banner: null };
  } catch (err) {
    const message = err instanceof ApiError && err.payload ? err.payload.error.message : String(err);
    return { ...state, validating: false, banner: message };
  }
}

// --- rendering ---

import { esc } from "./dashboard.js";
import { CELL_H, CELL_W, layoutGraph } from "./layout.js";

const NODE_W = 140;
const NODE_H = 64;

export function renderGraphSvg(state: EditorState): string {
  const layout = layoutGraph(state.buffer.graph);
  const width = layout.columns * CELL_W + 48;
  const height = layout.rows * CELL_H + 48;
  const lines = layout.edges
    .map(({ from, to }) => {
      const a = layout.positions.get(from)!;
      const b = layout.positions.get(to)!;
      return `<line x1="${a.x + NODE_W}" y1="${a.y + NODE_H / 2}" x2="${b.x}" y2="${b.y + NODE_H / 2}" class="edge"/>`;
    })
    .join("");
  const nodes = state.buffer.graph.nodes
    .map((node) => {
      const pos = layout.positions.get(node.id)!;
      const shape = state.shapes[node.id];
      const error = state.nodeErrors[node.id];
      const classes = ["node", node.frozen ? "frozen" : "", error ? "error" : ""]
        .filter(Boolean)
        .join(" ");
      return `
  <g class="${classes}" data-node-id="${esc(node.id)}" transform="translate(${pos.x},${pos.y})">
    <rect width="${NODE_W}" height="${NODE_H}" rx="8"/>
    <text x="10" y="20" class="node-name">${esc(node.name)}</text>
    <text x="10" y="38" class="node-kind">${esc(node.kind)}${node.frozen ? " &#10052;" : ""}</text>
    <text x="10" y="54" class="node-shape">${shape ? "&rarr; [" + shape.join(", ") + "]" : ""}</text>
    ${error ? `<title>${esc(error)}</title>` : ""}
  </g>`;
    })
    .join("");
  return `<svg class="graph-canvas" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${lines}${nodes}</svg>`;
}

export function renderNodeErrors(state: EditorState): string {
  const entries = Object.entries(state.nodeErrors);
  if (!entries.length) return "";
  return `<div class="node-errors">${entries
    .map(([id, msg]) => `<div class="node-error" data-node-id="${esc(id)}"><b>${esc(id)}</b>: ${esc(msg)}</div>`)
    .join("")}</div>`;
}

export function renderConflictDialog(conflict: ConflictState): string {
  return `
<div class="dialog-backdrop">
  <div class="dialog" role="dialog" aria-label="revision conflict">
    <h3>Draft changed by someone else</h3>
    <p>${esc(conflict.message)}</p>
    <p>The stored draft is at revision ${conflict.latestRevision}; your buffer is stale.</p>
    <button id="conflict-reload">Load latest (discard my edits)</button>
    <button id="conflict-dismiss">Keep editing locally</button>
  </div>
</div>`;
}

export function renderReportCard(report: Report): string {
  return `
<div class="report-card">
  <h4>Validation report <span class="evaluator">${esc(report.evaluator)}</span></h4>
  <dl>
    <dt>accuracy</dt><dd>${(report.accuracy * 100).toFixed(1)}%</dd>
    <dt>latency</dt><dd>${report.inference_latency_ms.toFixed(3)} ms</dd>
    <dt>training time</dt><dd>${report.train_time_s.toFixed(2)} s</dd>
    <dt>epochs</dt><dd>${report.epochs_completed}</dd>
    <dt>params</dt><dd>${report.params.toLocaleString()}</dd>
  </dl>
</div>`;
}

export function renderAttrPanel(node: NodeObj): string {
  const rows = Object.entries(node.attrs)
    .map(
      ([key, value]) => `
    <label>${esc(key)}
      <input type="number" step="any" name="${esc(key)}" value="${value}" data-node-id="${esc(node.id)}"/>
    </label>`,
    )
    .join("");
  return `
<div class="attr-panel" data-node-id="${esc(node.id)}">
  <h4>${esc(node.name)} <small>${esc(node.kind)}</small></h4>
  ${rows || "<p>no editable attributes</p>"}
  <label class="frozen-toggle">frozen
    <input type="checkbox" name="frozen" ${node.frozen ? "checked" : ""} data-node-id="${esc(node.id)}"/>
  </label>
</div>`;
}
