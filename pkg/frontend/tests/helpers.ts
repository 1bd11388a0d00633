// Mock transport + fixtures mirroring real service payloads.

import { ApiClient, type FetchLike } from "../src/api.js";
import type { DraftObj, GraphObj, ModelView, Report } from "../src/types.js";

export type Route = {
  method: string;
  path: string;
  status: number;
  body: unknown;
};

export function mockApi(routes: Route[]): { api: ApiClient; calls: { method: string; path: string; body: unknown }[] } {
  const calls: { method: string; path: string; body: unknown }[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.toString();
    calls.push({ method, path, body: init?.body ? JSON.parse(init.body as string) : undefined });
    const route = routes.find((r) => r.method === method && path === r.path);
    if (!route) {
      return new Response(JSON.stringify({ error: { code: "unknown_route", message: `no mock for ${method} ${path}` } }), {
        status: 404,
        headers: { "Content-Type": "application/json" },
      });
    }
    return new Response(JSON.stringify(route.body), {
      status: route.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { api: new ApiClient("", fetchFn), calls };
}

export function chainGraph(): GraphObj {
  return {
    input_shape: [16],
    nodes: [
      { id: "d0", name: "dense block 0", kind: "dense", attrs: { in_features: 16, out_features: 32, bias: 1 }, frozen: false, reinit: false },
      { id: "d0a", name: "activation", kind: "relu", attrs: {}, frozen: false, reinit: false },
      { id: "d1", name: "dense block 1", kind: "dense", attrs: { in_features: 32, out_features: 2, bias: 1 }, frozen: false, reinit: false },
      { id: "dout", name: "softmax", kind: "softmax", attrs: {}, frozen: false, reinit: false },
    ],
    edges: [["d0", "d0a"], ["d0a", "d1"], ["d1", "dout"]],
  };
}

export function modelView(id: string, name: string, over: Partial<ModelView> = {}): ModelView {
  return {
    model_id: id,
    name,
    task: "tabular_classification",
    status: "published",
    author: "seed",
    created_at: "2026-08-10T00:00:00.000000Z",
    updated_at: "2026-08-10T00:00:00.000000Z",
    metadata: { pretrained_dataset: "blobs16-source", accuracy: 0.97, latency_ms: 0.12, params: 610, parent_model_id: null },
    weights_ref: "a".repeat(64),
    graph: chainGraph(),
    shapes: { d0: [32], d0a: [32], d1: [2], dout: [2] },
    params: 610,
    ...over,
  };
}

export function draftObj(over: Partial<DraftObj> = {}): DraftObj {
  return {
    schema_version: "1",
    base_model_id: "m-base",
    revision: 1,
    author: "alice",
    graph: chainGraph(),
    pending_config: { tl_method: "fine_tune", lr: 0.05 },
    ...over,
  };
}

export function report(over: Partial<Report> = {}): Report {
  return {
    accuracy: 0.95,
    train_time_s: 1.2,
    inference_latency_ms: 0.3,
    params: 610,
    epochs_completed: 5,
    config: { tl_method: "fine_tune", base_model_id: "m-base", dataset_id: "d-blobs-tgt" },
    evaluator: "real",
    ...over,
  };
}
