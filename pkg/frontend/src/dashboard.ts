// Model dashboard: list, client-side filtering, lineage chains.

import type { ModelView } from "./types.js";

export function esc(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function filterModels(models: ModelView[], query: string): ModelView[] {
  const needle = query.trim().toLowerCase();
  if (!needle) return models;
  return models.filter(
    (m) =>
      m.name.toLowerCase().includes(needle) ||
      m.task.toLowerCase().includes(needle) ||
      m.model_id.toLowerCase().includes(needle),
  );
}

export function renderModelRows(models: ModelView[]): string {
  // one <tr data-model-id> per payload entry; the row count is the contract
  return models
    .map(
      (m) => `
  <tr data-model-id="${esc(m.model_id)}">
    <td class="name"><a href="#/editor/model/${esc(m.model_id)}">${esc(m.name)}</a></td>
    <td>${esc(m.task)}</td>
    <td class="num">${(m.metadata.accuracy * 100).toFixed(1)}%</td>
    <td class="num">${m.metadata.latency_ms.toFixed(3)} ms</td>
    <td class="num">${m.params.toLocaleString()}</td>
    <td>${esc(m.author)}</td>
    <td><button class="lineage-btn" data-model-id="${esc(m.model_id)}">history</button></td>
  </tr>`,
    )
    .join("");
}

export function renderDashboard(models: ModelView[], query: string): string {
  const visible = filterModels(models, query);
  if (models.length === 0) {
    return `<div class="empty-state">No models published yet. Publish one with the CLI or API.</div>`;
  }
  return `
<table class="models">
  <thead><tr><th>name</th><th>task</th><th>accuracy</th><th>latency</th><th>params</th><th>author</th><th></th></tr></thead>
  <tbody>${renderModelRows(visible)}</tbody>
</table>
<div class="hint">${visible.length} of ${models.length} models</div>`;
}

export function renderLineage(chain: ModelView[]): string {
  // root-first chain, exactly as the server returns it
  const steps = chain
    .map(
      (m) => `<span class="lineage-step" data-model-id="${esc(m.model_id)}">
        ${esc(m.name)} <small>(${(m.metadata.accuracy * 100).toFixed(1)}%)</small></span>`,
    )
    .join(`<span class="lineage-arrow">&rarr;</span>`);
  return `<div class="lineage-chain">${steps}</div>`;
}

export function renderApiBanner(message: string): string {
  return `<div class="banner error">
    Service unreachable: ${esc(message)}
    <button id="retry-btn">retry</button>
  </div>`;
}
