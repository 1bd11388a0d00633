// Recommendation wizard: form -> request, submission, ticket polling, and
// the client-side re-check that only constraint-satisfying rows render.

import type { ApiClient } from "./api.js";
import { esc } from "./dashboard.js";
import type {
  ConstraintObj,
  GenieEntry,
  GenieRecommendation,
  GenieRequestObj,
  Report,
  TargetObj,
} from "./types.js";

export interface GenieForm {
  task: string;
  dataset_id: string;
  deployment: "cloud" | "edge";
  constraints: ConstraintObj[];
  targets: TargetObj[];
  top_k: number;
  explore_budget: number;
}

export interface FormCheck {
  ok: boolean;
  hint: string | null;
}

export function checkForm(form: GenieForm): FormCheck {
  if (!form.task) return { ok: false, hint: "pick a task" };
  if (!form.dataset_id) return { ok: false, hint: "pick a target dataset" };
  if (form.targets.length === 0) {
    return { ok: false, hint: "add at least one optimization target" };
  }
  if (form.top_k < 1) return { ok: false, hint: "top_k must be at least 1" };
  return { ok: true, hint: null };
}

export function buildRequest(form: GenieForm): GenieRequestObj {
  return {
    task: form.task,
    dataset_id: form.dataset_id,
    deployment: form.deployment,
    constraints: form.constraints,
    targets: form.targets,
    top_k: form.top_k,
    explore_budget: form.explore_budget,
  };
}

export function reportSatisfies(report: Report, constraint: ConstraintObj): boolean {
  const value =
    constraint.metric === "latency_ms" ? report.inference_latency_ms : report[constraint.metric];
  return constraint.op === ">=" ? value >= constraint.value : value <= constraint.value;
}

/** Trust but verify: drop any server row that violates a requested
 *  constraint before rendering. */
export function recheckEntries(entries: GenieEntry[], constraints: ConstraintObj[]): GenieEntry[] {
  return entries.filter((entry) => constraints.every((c) => reportSatisfies(entry.report, c)));
}

export type GeniePhase =
  | { kind: "idle" }
  | { kind: "polling"; ticketId: string }
  | { kind: "done"; recommendation: GenieRecommendation; dropped: number }
  | { kind: "failed"; message: string };

export async function submitGenie(
  api: ApiClient,
  form: GenieForm,
): Promise<GeniePhase> {
  const check = checkForm(form);
  if (!check.ok) return { kind: "failed", message: check.hint ?? "invalid form" };
  const result = await api.submitGenie(buildRequest(form));
  if (result.status === "complete" && result.recommendation) {
    return finishPhase(result.recommendation, form.constraints);
  }
  return { kind: "polling", ticketId: result.ticket_id! };
}

export async function pollTicket(
  api: ApiClient,
  ticketId: string,
  constraints: ConstraintObj[],
): Promise<GeniePhase> {
  const ticket = await api.genieTicket(ticketId);
  if (ticket.status === "pending") return { kind: "polling", ticketId };
  if (ticket.status === "failed") return { kind: "failed", message: ticket.error ?? "exploration failed" };
  return finishPhase(ticket.recommendation!, constraints);
}

function finishPhase(recommendation: GenieRecommendation, constraints: ConstraintObj[]): GeniePhase {
  const kept = recheckEntries(recommendation.entries, constraints);
  return {
    kind: "done",
    recommendation: { ...recommendation, entries: kept },
    dropped: recommendation.entries.length - kept.length,
  };
}

// --- rendering ---

export function renderResultRows(entries: GenieEntry[]): string {
  return entries
    .map(
      (entry, i) => `
  <tr class="genie-row" data-entry-index="${i}">
    <td>${i + 1}</td>
    <td class="num">${(entry.report.accuracy * 100).toFixed(1)}%</td>
    <td class="num">${entry.report.inference_latency_ms.toFixed(3)} ms</td>
    <td class="num">${entry.report.train_time_s.toFixed(2)} s</td>
    <td>${esc(entry.config["tl_method"])}</td>
    <td><span class="tag">${esc(entry.provenance)}</span></td>
    <td>
      <button class="expand-btn" data-entry-index="${i}">config</button>
      <button class="open-editor-btn" data-entry-index="${i}">open in editor</button>
    </td>
  </tr>
  <tr class="genie-config hidden" data-entry-index="${i}">
    <td colspan="7"><pre>${esc(JSON.stringify(entry.config, null, 2))}</pre></td>
  </tr>`,
    )
    .join("");
}

export function renderGenieResults(phase: GeniePhase): string {
  switch (phase.kind) {
    case "idle":
      return "";
    case "polling":
      return `<div class="progress">exploring configurations&hellip; <span class="spinner"></span>
        <small>ticket ${esc(phase.ticketId)}</small></div>`;
    case "failed":
      return `<div class="banner error">${esc(phase.message)}</div>`;
    case "done": {
      const rec = phase.recommendation;
      if (rec.entries.length === 0) {
        return `<div class="empty-state">No configuration satisfies the constraints.</div>`;
      }
      const note = phase.dropped > 0
        ? `<div class="hint warn">${phase.dropped} server row(s) failed the client-side re-check and were hidden</div>`
        : "";
      return `
<div class="hint">method: <b>${esc(rec.tl_method)}</b>${rec.explored ? " (explored new configurations)" : " (from history)"}</div>
${note}
<table class="genie-results">
  <thead><tr><th>#</th><th>accuracy</th><th>latency</th><th>train time</th><th>method</th><th>source</th><th></th></tr></thead>
  <tbody>${renderResultRows(rec.entries)}</tbody>
</table>`;
    }
  }
}
