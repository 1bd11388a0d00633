// DOM wiring: hash router, event delegation, 2 s job/ticket polling.

import { ApiClient, ApiError } from "./api.js";
import { renderApiBanner, renderDashboard, renderLineage } from "./dashboard.js";
import {
  applyGraphEdit,
  draftFromModel,
  initialEditorState,
  renderAttrPanel,
  renderConflictDialog,
  renderGraphSvg,
  renderNodeErrors,
  renderReportCard,
  reloadLatest,
  runValidation,
  saveDraft,
  setFrozen,
  setNodeAttr,
  type EditorState,
} from "./editor.js";
import {
  pollTicket,
  renderGenieResults,
  submitGenie,
  type GenieForm,
  type GeniePhase,
} from "./genie.js";
import type { DatasetView, ModelView } from "./types.js";

const POLL_MS = 2000;
const api = new ApiClient("");

const app = () => document.getElementById("app")!;

function nav(route: string): string {
  const items: [string, string][] = [
    ["#/dashboard", "Dashboard"],
    ["#/genie", "Genie"],
    ["#/reports", "Jobs"],
  ];
  return `<nav>${items
    .map(([href, label]) => `<a href="${href}" class="${route.startsWith(href) ? "active" : ""}">${label}</a>`)
    .join("")}</nav>`;
}

// --- dashboard ---

let dashboardQuery = "";

async function showDashboard(): Promise<void> {
  let models: ModelView[];
  try {
    models = await api.listModels();
  } catch (err) {
    app().innerHTML = nav("#/dashboard") + renderApiBanner(String((err as Error).message));
    document.getElementById("retry-btn")?.addEventListener("click", () => void showDashboard());
    return;
  }
  app().innerHTML = `${nav("#/dashboard")}
    <h2>Models</h2>
    <input id="model-filter" placeholder="filter by name / task / id" value="${dashboardQuery}"/>
    <div id="model-table">${renderDashboard(models, dashboardQuery)}</div>
    <div id="lineage-box"></div>`;
  document.getElementById("model-filter")?.addEventListener("input", (e) => {
    dashboardQuery = (e.target as HTMLInputElement).value;
    document.getElementById("model-table")!.innerHTML = renderDashboard(models, dashboardQuery);
  });
  app().addEventListener("click", (e) => {
    const btn = (e.target as HTMLElement).closest<HTMLElement>(".lineage-btn");
    if (!btn) return;
    void api.lineage(btn.dataset.modelId!).then((chain) => {
      document.getElementById("lineage-box")!.innerHTML =
        `<h3>Edit history</h3>` + renderLineage(chain);
    });
  });
}

// --- editor ---

let editor: EditorState | null = null;
let selectedNode: string | null = null;
let datasets: DatasetView[] = [];

function editorShell(): string {
  return `${nav("#/editor")}
    <h2>Editor <small id="draft-label"></small></h2>
    <div id="editor-banner"></div>
    <div class="editor-grid">
      <div id="canvas-box"></div>
      <aside>
        <div id="attr-box"><p class="hint">right-click a layer to edit its attributes</p></div>
        <div id="ensemble-box"></div>
        <div id="report-box"></div>
      </aside>
    </div>
    <div id="dialog-box"></div>`;
}

function renderEnsemblePanel(models: ModelView[], state: EditorState): string {
  const cfg = state.buffer.pending_config as Record<string, unknown>;
  const modelOptions = models
    .map((m) => `<option value="${m.model_id}" ${m.model_id === state.buffer.base_model_id ? "selected" : ""}>${m.name}</option>`)
    .join("");
  const datasetOptions = datasets
    .map((d) => `<option value="${d.dataset_id}" ${d.dataset_id === cfg["dataset_id"] ? "selected" : ""}>${d.name}</option>`)
    .join("");
  const methods = ["fine_tune", "knowledge_distill", "tradaboost", "mmd_adapt", "from_scratch"]
    .map((m) => `<option ${m === cfg["tl_method"] ? "selected" : ""}>${m}</option>`)
    .join("");
  const augNames = Object.keys(AUG_CHOICES)
    .map((name) => `<option ${name === currentAugChoice(cfg) ? "selected" : ""}>${name}</option>`)
    .join("");
  return `
<div class="ensemble-panel">
  <h4>Ensemble edit</h4>
  <label>base model <select id="ens-model">${modelOptions}</select></label>
  <label>dataset <select id="ens-dataset"><option value=""></option>${datasetOptions}</select></label>
  <label>method <select id="ens-method"><option value=""></option>${methods}</select></label>
  <label>augmentation <select id="ens-aug">${augNames}</select></label>
  <label>learning rate <input id="ens-lr" type="number" step="any" value="${cfg["lr"] ?? 0.05}"/></label>
  <label>epochs <input id="ens-epochs" type="number" value="${cfg["epochs"] ?? 5}"/></label>
  <label>frozen layers <input id="ens-frozen" type="number" value="${cfg["frozen_layers"] ?? 0}"/></label>
  <div class="row">
    <button id="save-draft-btn">Save draft</button>
    <button id="validate-btn">Validate</button>
    <button id="train-btn">Train</button>
  </div>
</div>`;
}

const AUG_CHOICES: Record<string, { op: string; [k: string]: unknown }[]> = {
  none: [],
  "gaussian noise 0.1": [{ op: "gaussian_noise", sigma: 0.1 }],
  "gaussian noise 0.3": [{ op: "gaussian_noise", sigma: 0.3 }],
  "feature dropout 0.05": [{ op: "feature_dropout", p: 0.05 }],
  "label noise 0.01": [{ op: "label_noise", p: 0.01 }],
};

function currentAugChoice(cfg: Record<string, unknown>): string {
  const aug = cfg["aug"] as { steps?: { op: string }[] } | undefined;
  if (!aug?.steps?.length) return "none";
  const sig = JSON.stringify(aug.steps);
  for (const [name, steps] of Object.entries(AUG_CHOICES)) {
    if (JSON.stringify(steps) === sig) return name;
  }
  return "none";
}

function repaintEditor(models: ModelView[]): void {
  if (!editor) return;
  document.getElementById("draft-label")!.textContent = editor.draftId
    ? `${editor.draftId} @ rev ${editor.buffer.revision}${editor.dirty ? " *" : ""}`
    : "(unsaved draft)";
  document.getElementById("editor-banner")!.innerHTML = editor.banner
    ? `<div class="banner">${editor.banner}</div>`
    : "";
  document.getElementById("canvas-box")!.innerHTML =
    renderGraphSvg(editor) + renderNodeErrors(editor);
  document.getElementById("ensemble-box")!.innerHTML = renderEnsemblePanel(models, editor);
  document.getElementById("report-box")!.innerHTML = editor.report
    ? renderReportCard(editor.report)
    : "";
  document.getElementById("dialog-box")!.innerHTML = editor.conflict
    ? renderConflictDialog(editor.conflict)
    : "";
  if (selectedNode) {
    const node = editor.buffer.graph.nodes.find((n) => n.id === selectedNode);
    document.getElementById("attr-box")!.innerHTML = node ? renderAttrPanel(node) : "";
  }
  wireEditorEvents(models);
}

function pendingConfigFromPanel(): Record<string, unknown> {
  const read = (id: string) => (document.getElementById(id) as HTMLInputElement | HTMLSelectElement)?.value;
  const cfg: Record<string, unknown> = { ...editor!.buffer.pending_config };
  if (read("ens-dataset")) cfg["dataset_id"] = read("ens-dataset");
  if (read("ens-method")) cfg["tl_method"] = read("ens-method");
  if (read("ens-lr")) cfg["lr"] = Number(read("ens-lr"));
  if (read("ens-epochs")) cfg["epochs"] = Number(read("ens-epochs"));
  if (read("ens-frozen")) cfg["frozen_layers"] = Number(read("ens-frozen"));
  const augChoice = read("ens-aug");
  if (augChoice && augChoice !== "none") {
    cfg["aug"] = { steps: AUG_CHOICES[augChoice], seed: 0 };
  } else if (augChoice === "none") {
    delete cfg["aug"];
  }
  return cfg;
}

function wireEditorEvents(models: ModelView[]): void {
  document.querySelectorAll<SVGGElement>("g.node").forEach((el) => {
    el.addEventListener("contextmenu", (e) => {
      e.preventDefault();
      selectedNode = el.dataset.nodeId ?? null;
      repaintEditor(models);
    });
    el.addEventListener("click", () => {
      selectedNode = el.dataset.nodeId ?? null;
      repaintEditor(models);
    });
  });
  document.querySelectorAll<HTMLInputElement>(".attr-panel input[type=number]").forEach((input) => {
    input.addEventListener("change", () => {
      if (!editor) return;
      const nodeId = input.dataset.nodeId!;
      const next = setNodeAttr(editor.buffer.graph, nodeId, input.name, Number(input.value));
      void applyGraphEdit(api, editor, next, nodeId).then((s) => {
        editor = s;
        repaintEditor(models);
      });
    });
  });
  document.querySelector<HTMLInputElement>(".attr-panel input[name=frozen]")?.addEventListener("change", (e) => {
    if (!editor) return;
    const input = e.target as HTMLInputElement;
    const next = setFrozen(editor.buffer.graph, input.dataset.nodeId!, input.checked);
    void applyGraphEdit(api, editor, next, input.dataset.nodeId!).then((s) => {
      editor = s;
      repaintEditor(models);
    });
  });
  document.getElementById("save-draft-btn")?.addEventListener("click", (e) => {
    if (!editor) return;
    const btn = e.target as HTMLButtonElement;
    if (btn.disabled) return;
    btn.disabled = true; // at most one in-flight save per draft
    editor = { ...editor, buffer: { ...editor.buffer, pending_config: pendingConfigFromPanel() } };
    void saveDraft(api, editor).then((s) => {
      editor = s;
      repaintEditor(models);
    });
  });
  document.getElementById("validate-btn")?.addEventListener("click", () => {
    if (!editor) return;
    const cfg = {
      ...pendingConfigFromPanel(),
      base_model_id: editor.buffer.base_model_id,
      graph: editor.buffer.graph,
    };
    document.getElementById("report-box")!.innerHTML = `<div class="progress">validating&hellip;</div>`;
    void runValidation(api, editor, cfg, null).then((s) => {
      editor = s;
      repaintEditor(models);
    });
  });
  document.getElementById("train-btn")?.addEventListener("click", () => {
    if (!editor) return;
    const cfg = {
      ...pendingConfigFromPanel(),
      base_model_id: editor.buffer.base_model_id,
      graph: editor.buffer.graph,
    };
    void api.submitJob(cfg, editor.buffer.author || "ui").then((r) => {
      location.hash = `#/reports?watch=${r.job_id}`;
    });
  });
  document.getElementById("conflict-reload")?.addEventListener("click", () => {
    if (!editor) return;
    void reloadLatest(api, editor).then((s) => {
      editor = s;
      repaintEditor(models);
    });
  });
  document.getElementById("conflict-dismiss")?.addEventListener("click", () => {
    if (!editor) return;
    editor = { ...editor, conflict: null };
    repaintEditor(models);
  });
}

async function showEditor(kind: "model" | "draft", id: string): Promise<void> {
  app().innerHTML = editorShell();
  const models = await api.listModels();
  datasets = await api.listDatasets();
  if (kind === "model") {
    const model = await api.getModel(id);
    editor = initialEditorState(null, draftFromModel(id, "ui", model.graph), model.shapes ?? {});
  } else {
    const view = await api.getDraft(id);
    editor = initialEditorState(view.draft_id, view.draft, view.shapes);
  }
  selectedNode = null;
  repaintEditor(models);
}

// --- genie view ---

let geniePhase: GeniePhase = { kind: "idle" };
let genieTimer: number | null = null;

function genieFormHtml(models: ModelView[]): string {
  const tasks = [...new Set(models.map((m) => m.task))];
  return `${nav("#/genie")}
  <h2>Model Genie</h2>
  <form id="genie-form">
    <label>task <select id="g-task">${tasks.map((t) => `<option>${t}</option>`).join("")}</select></label>
    <label>dataset <select id="g-dataset">${datasets.map((d) => `<option value="${d.dataset_id}">${d.name}</option>`).join("")}</select></label>
    <label>deployment <select id="g-deploy"><option>cloud</option><option>edge</option></select></label>
    <fieldset><legend>constraints</legend>
      <label><input type="checkbox" id="g-acc-on"/> accuracy &ge; <input id="g-acc" type="number" step="any" value="0.9"/></label>
      <label><input type="checkbox" id="g-lat-on"/> latency_ms &le; <input id="g-lat" type="number" step="any" value="5"/></label>
    </fieldset>
    <fieldset><legend>targets (primary first)</legend>
      <label><input type="checkbox" id="g-t-acc" checked/> maximize accuracy</label>
      <label><input type="checkbox" id="g-t-lat"/> minimize latency</label>
    </fieldset>
    <label>top k <input id="g-topk" type="number" value="5"/></label>
    <label>explore budget <input id="g-budget" type="number" value="9"/></label>
    <button id="genie-submit" type="submit">Recommend</button>
    <span id="genie-hint" class="hint"></span>
  </form>
  <div id="genie-results"></div>`;
}

function readGenieForm(): GenieForm {
  const val = (id: string) => (document.getElementById(id) as HTMLInputElement | HTMLSelectElement).value;
  const checked = (id: string) => (document.getElementById(id) as HTMLInputElement).checked;
  const constraints: GenieForm["constraints"] = [];
  if (checked("g-acc-on")) constraints.push({ metric: "accuracy", op: ">=", value: Number(val("g-acc")) });
  if (checked("g-lat-on")) constraints.push({ metric: "latency_ms", op: "<=", value: Number(val("g-lat")) });
  const targets: GenieForm["targets"] = [];
  if (checked("g-t-acc")) targets.push({ metric: "accuracy", direction: "maximize" });
  if (checked("g-t-lat")) targets.push({ metric: "latency_ms", direction: "minimize" });
  return {
    task: val("g-task"),
    dataset_id: val("g-dataset"),
    deployment: val("g-deploy") as "cloud" | "edge",
    constraints,
    targets,
    top_k: Number(val("g-topk")),
    explore_budget: Number(val("g-budget")),
  };
}

function repaintGenieResults(form: GenieForm, models: ModelView[]): void {
  document.getElementById("genie-results")!.innerHTML = renderGenieResults(geniePhase);
  if (geniePhase.kind === "done") {
    document.querySelectorAll<HTMLElement>(".expand-btn").forEach((btn) =>
      btn.addEventListener("click", () => {
        document
          .querySelector(`.genie-config[data-entry-index="${btn.dataset.entryIndex}"]`)
          ?.classList.toggle("hidden");
      }),
    );
    document.querySelectorAll<HTMLElement>(".open-editor-btn").forEach((btn) =>
      btn.addEventListener("click", () => {
        if (geniePhase.kind !== "done") return;
        const entry = geniePhase.recommendation.entries[Number(btn.dataset.entryIndex)];
        const baseId = entry.config["base_model_id"] as string;
        void api.getModel(baseId).then(async (model) => {
          const draft = draftFromModel(baseId, "ui", model.graph, { ...entry.config });
          delete (draft.pending_config as Record<string, unknown>)["graph"];
          delete (draft.pending_config as Record<string, unknown>)["base_model_id"];
          const saved = await api.saveDraft(draft, null);
          location.hash = `#/editor/draft/${saved.draft_id}`;
        });
      }),
    );
  }
}

async function showGenie(): Promise<void> {
  const models = await api.listModels();
  datasets = await api.listDatasets();
  app().innerHTML = genieFormHtml(models);
  const form = document.getElementById("genie-form")!;
  const refreshHint = () => {
    const check = readGenieForm();
    const result = check.targets.length === 0 ? "add at least one optimization target" : "";
    (document.getElementById("genie-submit") as HTMLButtonElement).disabled = !!result;
    document.getElementById("genie-hint")!.textContent = result;
  };
  form.addEventListener("change", refreshHint);
  refreshHint();
  form.addEventListener("submit", (e) => {
    e.preventDefault();
    const request = readGenieForm();
    geniePhase = { kind: "polling", ticketId: "" };
    repaintGenieResults(request, models);
    void submitGenie(api, request).then((phase) => {
      geniePhase = phase;
      repaintGenieResults(request, models);
      if (phase.kind === "polling") {
        if (genieTimer) clearInterval(genieTimer);
        genieTimer = setInterval(() => {
          void pollTicket(api, phase.ticketId, request.constraints).then((next) => {
            geniePhase = next;
            if (next.kind !== "polling" && genieTimer) clearInterval(genieTimer);
            repaintGenieResults(request, models);
          });
        }, POLL_MS) as unknown as number;
      }
    });
  });
}

// --- jobs / reports ---

let jobsTimer: number | null = null;

async function showJobs(): Promise<void> {
  const paint = async () => {
    const jobs = await api.listJobs();
    const rows = jobs
      .map(
        (j) => `
  <tr>
    <td>${j.job_id}</td><td class="state-${j.state}">${j.state}</td>
    <td>${j.device ?? ""}</td>
    <td>${j.result ? (j.result.accuracy * 100).toFixed(1) + "%" : (j.fail_reason ?? "")}</td>
    <td>${j.result_model_id ? `<a href="#/editor/model/${j.result_model_id}">${j.result_model_id}</a>` : ""}</td>
    <td>
      <button data-job="${j.job_id}" data-action="pause">pause</button>
      <button data-job="${j.job_id}" data-action="resume">resume</button>
      <button data-job="${j.job_id}" data-action="terminate">stop</button>
    </td>
  </tr>`,
      )
      .join("");
    app().innerHTML = `${nav("#/reports")}
      <h2>Training jobs</h2>
      <table class="jobs"><thead><tr><th>id</th><th>state</th><th>device</th><th>result</th><th>model</th><th></th></tr></thead>
      <tbody>${rows || `<tr><td colspan="6" class="empty-state">no jobs yet</td></tr>`}</tbody></table>`;
    document.querySelectorAll<HTMLElement>("button[data-job]").forEach((btn) =>
      btn.addEventListener("click", () => {
        void api
          .jobAction(btn.dataset.job!, btn.dataset.action as "pause" | "resume" | "terminate")
          .then(() => paint())
          .catch((err) => alert(String((err as Error).message)));
      }),
    );
  };
  await paint();
  if (jobsTimer) clearInterval(jobsTimer);
  jobsTimer = setInterval(() => {
    if (location.hash.startsWith("#/reports")) void paint();
    else if (jobsTimer) clearInterval(jobsTimer);
  }, POLL_MS) as unknown as number;
}

// --- router ---

async function route(): Promise<void> {
  const hash = location.hash || "#/dashboard";
  try {
    if (hash.startsWith("#/editor/")) {
      const [, , kind, id] = hash.split("/");
      await showEditor(kind as "model" | "draft", id);
    } else if (hash.startsWith("#/genie")) {
      await showGenie();
    } else if (hash.startsWith("#/reports")) {
      await showJobs();
    } else {
      await showDashboard();
    }
  } catch (err) {
    const message = err instanceof ApiError ? err.message : String(err);
    app().innerHTML = nav(hash) + renderApiBanner(message);
    document.getElementById("retry-btn")?.addEventListener("click", () => void route());
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
