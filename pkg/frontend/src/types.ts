/** Payload types for the solver service HTTP API. These mirror the JSON
 * the service actually returns; nothing here is invented client-side. */

/** Run configuration as served by GET /defaults and accepted by POST /jobs.
 * Five sections, one per configuration panel. */
export interface RunConfig {
  geometry: {
    msh: string | null;
    geo: string | null;
    dim: number;
    lc: number;
    domain_order: number;
    boundary_order: number;
  };
  material: {
    model: string;
    k: number;
    E: number;
    nu: number;
    plane: string;
    a0: number | null;
    a1: number | null;
    a2: number | null;
    a3: number | null;
    custom_energy: string | null;
  };
  boundary: {
    dirichlet: {
      value: unknown;
      method: string;
      tau: number;
      beta: number;
    };
    neumann: { value: unknown };
    body_force: unknown;
  };
  network: {
    widths: number[];
    activation: string;
    seed: number;
  };
  training: {
    max_epochs: number;
    lr: number;
    lr_decay: number;
    early_stop: { window: number; rho: number };
    solver: string;
    particular_steps: number;
    particular_lr: number;
  };
}

export type PanelName = keyof RunConfig;

/** Mesh as serialized by the service: flattened node coordinates plus
 * element records and named element-index groups. */
export interface MeshPayload {
  dim: number;
  /** node coordinates, flattened row-major: [x0, y0, (z0,) x1, ...] */
  nodes: number[];
  elements: { kind: string; conn: number[] }[];
  /** group name -> sorted element indices (into `elements`) */
  groups: Record<string, number[]>;
}

export interface ChatMessage {
  role: "system" | "user" | "assistant";
  content: string;
}

/** Response of POST /sessions/{id}/turn on success. */
export interface TurnResponse {
  geo_text: string;
  mesh: MeshPayload;
  transcript: ChatMessage[];
}

export type JobStateName = "queued" | "running" | "done" | "failed" | "aborted";

export interface JobState {
  id: string;
  state: JobStateName;
  epoch: number | null;
  loss: number | null;
  error: string | null;
}

export interface HistoryPayload {
  epochs: number[];
  losses: number[];
}

/** Response of GET /jobs/{id}/field?name=... */
export interface FieldPayload {
  name: string;
  values: number[] | number[][];
  mesh: MeshPayload;
}
