/** Shared test fixtures: a tiny unit-square mesh payload, a cube point
 * grid, the served default config, and a scripted fetch. */

import type { MeshPayload, RunConfig } from "../src/types.js";
import type { FetchLike } from "../src/api.js";

/** 2x2 crossed-triangle unit square: 9 nodes, 8 triangles, left edge
 * Dirichlet, right edge Neumann. */
export function squareMesh(): MeshPayload {
  const nodes: number[] = [];
  for (let j = 0; j <= 2; j++)
    for (let i = 0; i <= 2; i++) nodes.push(i / 2, j / 2);
  const nid = (i: number, j: number) => j * 3 + i;
  const elements: { kind: string; conn: number[] }[] = [];
  const domain: number[] = [];
  for (let j = 0; j < 2; j++)
    for (let i = 0; i < 2; i++) {
      const [a, b, c, d] = [nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)];
      elements.push({ kind: "tri3", conn: [a, b, c] });
      domain.push(elements.length - 1);
      elements.push({ kind: "tri3", conn: [a, c, d] });
      domain.push(elements.length - 1);
    }
  const left: number[] = [];
  const right: number[] = [];
  for (let k = 0; k < 2; k++) {
    elements.push({ kind: "line2", conn: [nid(0, k), nid(0, k + 1)] });
    left.push(elements.length - 1);
    elements.push({ kind: "line2", conn: [nid(2, k), nid(2, k + 1)] });
    right.push(elements.length - 1);
  }
  return {
    dim: 2,
    nodes,
    elements,
    groups: { Omega: domain, Gamma_u: left, Gamma_t: right },
  };
}

/** Regular (n+1)^3 grid of nodes in the unit cube, no elements (the
 * point-cloud view only needs coordinates). */
export function cubeNodes(n: number): MeshPayload {
  const nodes: number[] = [];
  for (let k = 0; k <= n; k++)
    for (let j = 0; j <= n; j++)
      for (let i = 0; i <= n; i++) nodes.push(i / n, j / n, k / n);
  return { dim: 3, nodes, elements: [], groups: {} };
}

export function defaultConfig(): RunConfig {
  return {
    geometry: { msh: null, geo: null, dim: 2, lc: 1.0, domain_order: 2, boundary_order: 2 },
    material: {
      model: "poisson",
      k: 1.0,
      E: 1000.0,
      nu: 0.3,
      plane: "strain",
      a0: null,
      a1: null,
      a2: null,
      a3: null,
      custom_energy: null,
    },
    boundary: {
      dirichlet: { value: 0.0, method: "smooth-distance+penalty", tau: 0.001, beta: 1000.0 },
      neumann: { value: 0.0 },
      body_force: 0.0,
    },
    network: { widths: [30, 30, 30], activation: "tanh", seed: 0 },
    training: {
      max_epochs: 3000,
      lr: 0.01,
      lr_decay: 0.01,
      early_stop: { window: 200, rho: 0.05 },
      solver: "dem",
      particular_steps: 2000,
      particular_lr: 0.01,
    },
  };
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export type Route = (call: RecordedCall) => { status?: number; json: unknown } | undefined;

/** A fetch stub driven by a list of route functions; records every call. */
export function scriptedFetch(routes: Route[]): { fetch: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetch: FetchLike = async (url, init) => {
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    };
    calls.push(call);
    for (const route of routes) {
      const hit = route(call);
      if (hit) {
        const status = hit.status ?? 200;
        return new Response(JSON.stringify(hit.json), {
          status,
          headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no route for ${url}` }), { status: 404 });
  };
  return { fetch, calls };
}
