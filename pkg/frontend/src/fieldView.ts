/** Field visualization models.
 *
 * 2D: a per-triangle contour fill, each triangle colored by the mean of
 * its vertex values on the fixed ramp, with a min/max legend. 3D: a
 * point cloud restricted to a slab around a slice plane.
 *
 * Both are pure functions from payloads to plain data; canvas/DOM code
 * lives in main.ts.
 */

import { valueToColor } from "./colormap.js";
import type { FieldPayload, MeshPayload } from "./types.js";

export class MeshMismatch extends Error {}

/** Nodal scalars from a field payload; vector fields collapse to their
 * euclidean norm so everything renders through one path. */
export function nodalScalars(field: FieldPayload): number[] {
  const n = field.mesh.nodes.length / field.mesh.dim;
  const v = field.values;
  if (v.length !== n)
    throw new MeshMismatch(`field has ${v.length} values for ${n} mesh nodes`);
  return v.map((x) => (Array.isArray(x) ? Math.hypot(...x) : x));
}

export interface ContourModel {
  /** triangle vertex indices with the fill color for each */
  triangles: { conn: number[]; color: string }[];
  legend: { min: number; max: number };
}

export function contourModel(field: FieldPayload): ContourModel {
  const scalars = nodalScalars(field);
  const min = Math.min(...scalars);
  const max = Math.max(...scalars);
  const triangles: { conn: number[]; color: string }[] = [];
  for (const el of field.mesh.elements) {
    if (el.kind !== "tri3" && el.kind !== "quad4") continue;
    const mean = el.conn.reduce((s, i) => s + scalars[i], 0) / el.conn.length;
    triangles.push({ conn: el.conn, color: valueToColor(mean, min, max) });
  }
  return { triangles, legend: { min, max } };
}

export interface SlicePlane {
  axis: 0 | 1 | 2;
  position: number;
  thickness: number;
}

export interface PointCloudModel {
  /** node indices inside the slab */
  indices: number[];
  colors: string[];
  legend: { min: number; max: number };
}

/** 3D view: keep only nodes with |x_axis - position| <= thickness / 2. */
export function pointCloudSlice(field: FieldPayload, plane: SlicePlane): PointCloudModel {
  const mesh: MeshPayload = field.mesh;
  if (mesh.dim !== 3) throw new MeshMismatch("slice view requires a 3D mesh");
  const scalars = nodalScalars(field);
  const min = Math.min(...scalars);
  const max = Math.max(...scalars);
  const indices: number[] = [];
  const n = mesh.nodes.length / 3;
  for (let i = 0; i < n; i++) {
    const coord = mesh.nodes[i * 3 + plane.axis];
    if (Math.abs(coord - plane.position) <= plane.thickness / 2) indices.push(i);
  }
  return {
    indices,
    colors: indices.map((i) => valueToColor(scalars[i], min, max)),
    legend: { min, max },
  };
}
