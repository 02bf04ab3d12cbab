/** Mesh preview render model.
 *
 * The convention throughout the app: Dirichlet (Gamma_u) boundary
 * elements draw red, Neumann (Gamma_t) draw green, interior element
 * edges draw a light gray. The render model is pure data so it can be
 * tested without a canvas; `drawMesh` turns it into 2D canvas calls.
 */

import type { MeshPayload } from "./types.js";

export const DIRICHLET_COLOR = "#d62728"; // red
export const NEUMANN_COLOR = "#2ca02c"; // green
export const EDGE_COLOR = "#cccccc";

export interface RenderModel {
  dim: number;
  /** node positions projected to the unit square [0,1]^2 (x right, y up);
   * for 3D meshes this is the xy projection. */
  points: [number, number][];
  /** interior triangle/quad outlines as node-index pairs */
  edges: [number, number][];
  /** boundary facets with their group color */
  boundary: { conn: number[]; color: string }[];
  nodeCount: number;
  elementCount: number;
}

function nodeXY(nodes: number[], dim: number, i: number): [number, number] {
  return [nodes[i * dim], nodes[i * dim + 1]];
}

export function buildRenderModel(mesh: MeshPayload): RenderModel {
  const n = mesh.nodes.length / mesh.dim;
  const raw: [number, number][] = [];
  for (let i = 0; i < n; i++) raw.push(nodeXY(mesh.nodes, mesh.dim, i));

  // fit to the unit square, preserving aspect ratio
  const xs = raw.map((p) => p[0]);
  const ys = raw.map((p) => p[1]);
  const min = [Math.min(...xs), Math.min(...ys)];
  const span = Math.max(Math.max(...xs) - min[0], Math.max(...ys) - min[1], 1e-30);
  const points = raw.map(
    (p) => [(p[0] - min[0]) / span, (p[1] - min[1]) / span] as [number, number],
  );

  // unique undirected edges of the domain elements
  const seen = new Set<string>();
  const edges: [number, number][] = [];
  const domainKinds = new Set(["tri3", "quad4", "tet4"]);
  for (const el of mesh.elements) {
    if (!domainKinds.has(el.kind)) continue;
    const c = el.conn;
    for (let k = 0; k < c.length; k++) {
      const a = c[k];
      const b = c[(k + 1) % c.length];
      const key = a < b ? `${a}-${b}` : `${b}-${a}`;
      if (!seen.has(key)) {
        seen.add(key);
        edges.push([a, b]);
      }
    }
  }

  // boundary facets, colored by group
  const boundary: { conn: number[]; color: string }[] = [];
  for (const [group, color] of [
    ["Gamma_u", DIRICHLET_COLOR],
    ["Gamma_t", NEUMANN_COLOR],
  ] as const) {
    for (const idx of mesh.groups[group] ?? []) {
      boundary.push({ conn: mesh.elements[idx].conn, color });
    }
  }

  return { dim: mesh.dim, points, edges, boundary, nodeCount: n, elementCount: mesh.elements.length };
}

/** The subset of CanvasRenderingContext2D the renderer needs. */
export interface StrokeContext {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export function drawMesh(ctx: StrokeContext, model: RenderModel, w: number, h: number): void {
  const pad = 0.05;
  const scale = Math.min(w, h) * (1 - 2 * pad);
  const sx = (p: [number, number]) => pad * w + p[0] * scale;
  const sy = (p: [number, number]) => h - (pad * h + p[1] * scale); // y up

  const polyline = (conn: number[]) => {
    ctx.beginPath();
    const p0 = model.points[conn[0]];
    ctx.moveTo(sx(p0), sy(p0));
    for (const i of conn.slice(1)) {
      const p = model.points[i];
      ctx.lineTo(sx(p), sy(p));
    }
    ctx.stroke();
  };

  ctx.strokeStyle = EDGE_COLOR;
  ctx.lineWidth = 1;
  for (const [a, b] of model.edges) polyline([a, b]);
  for (const facet of model.boundary) {
    ctx.strokeStyle = facet.color;
    ctx.lineWidth = 3;
    polyline(facet.conn);
  }
}
