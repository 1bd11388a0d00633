// Wire types mirroring the service JSON exactly.

export interface NodeObj {
  id: string;
  name: string;
  kind: string;
  attrs: Record<string, number>;
  frozen: boolean;
  reinit?: boolean;
}

export interface GraphObj {
  input_shape: number[];
  nodes: NodeObj[];
  edges: [string, string][];
}

export interface DraftObj {
  schema_version: string;
  base_model_id: string;
  revision: number;
  author: string;
  graph: GraphObj;
  pending_config: Record<string, unknown>;
}

export interface ModelMeta {
  pretrained_dataset: string;
  accuracy: number;
  latency_ms: number;
  params: number;
  parent_model_id?: string | null;
}

export interface ModelView {
  model_id: string;
  name: string;
  task: string;
  status: string;
  author: string;
  created_at: string;
  updated_at: string;
  metadata: ModelMeta;
  weights_ref: string;
  graph: GraphObj;
  shapes: Record<string, number[]> | null;
  params: number;
}

export interface DraftView {
  draft_id: string;
  draft: DraftObj;
  shapes: Record<string, number[]>;
}

export interface Report {
  accuracy: number;
  train_time_s: number;
  inference_latency_ms: number;
  params: number;
  epochs_completed: number;
  config: Record<string, unknown>;
  evaluator: string;
}

export interface JobView {
  job_id: string;
  state: string;
  device: string | null;
  pinned_device: string | null;
  fail_reason: string | null;
  result: Report | null;
  result_model_id: string | null;
  checkpoint_epoch: number;
  config: Record<string, unknown>;
}

export interface DatasetView {
  dataset_id: string;
  name: string;
  kind: string;
  feature_shape: number[];
  num_classes: number;
  splits: { train_n: number; val_n: number; test_n: number };
  source: string;
  similarity_tags: string[];
}

export interface ConstraintObj {
  metric: "accuracy" | "latency_ms" | "train_time_s" | "params";
  op: ">=" | "<=";
  value: number;
}

export interface TargetObj {
  metric: "accuracy" | "latency_ms" | "train_time_s" | "params";
  direction: "maximize" | "minimize";
}

export interface GenieRequestObj {
  task: string;
  dataset_id: string;
  deployment: "cloud" | "edge";
  constraints: ConstraintObj[];
  targets: TargetObj[];
  top_k: number;
  explore_budget: number;
  tl_method?: string | null;
  seed?: number | null;
}

export interface GenieEntry {
  config: Record<string, unknown>;
  report: Report;
  provenance: "history" | "explored";
}

export interface GenieRecommendation {
  entries: GenieEntry[];
  tl_method: string;
  explored: boolean;
}

export interface GenieSubmitResult {
  status: "complete" | "pending";
  ticket_id: string | null;
  recommendation: GenieRecommendation | null;
}

export interface GenieTicket {
  ticket_id: string;
  status: "pending" | "complete" | "failed";
  recommendation: GenieRecommendation | null;
  error: string | null;
}

export interface ErrorPayload {
  error: { code: string; message: string; detail?: Record<string, unknown> };
}

export interface GraphValidateResult {
  shapes: Record<string, number[]>;
  params: number;
  executable: boolean;
}
