import { describe, expect, it } from "vitest";

import { valueToColor } from "../src/colormap.js";
import { MeshMismatch, contourModel, pointCloudSlice } from "../src/fieldView.js";
import type { FieldPayload } from "../src/types.js";
import { cubeNodes, squareMesh } from "./fixtures.js";

function field2d(values: number[]): FieldPayload {
  return { name: "u", values, mesh: squareMesh() };
}

describe("contourModel", () => {
  it("renders a constant field as a single color with min == max", () => {
    const model = contourModel(field2d(new Array(9).fill(3.25)));
    expect(model.legend.min).toBe(3.25);
    expect(model.legend.max).toBe(3.25);
    const colors = new Set(model.triangles.map((t) => t.color));
    expect(colors.size).toBe(1);
    expect(model.triangles).toHaveLength(8);
  });

  it("renders u = x as a monotone left-to-right ramp", () => {
    const mesh = squareMesh();
    const n = mesh.nodes.length / 2;
    const values = Array.from({ length: n }, (_, i) => mesh.nodes[i * 2]);
    const model = contourModel({ name: "u", values, mesh });
    // mean triangle x-coordinate orders the triangles; the ramp parameter
    // follows the same order, so colors at the extremes differ
    const meanX = (conn: number[]) =>
      conn.reduce((s, i) => s + mesh.nodes[i * 2], 0) / conn.length;
    const sorted = [...model.triangles].sort((a, b) => meanX(a.conn) - meanX(b.conn));
    for (const tri of sorted) {
      expect(tri.color).toBe(valueToColor(meanX(tri.conn), 0, 1));
    }
    expect(sorted[sorted.length - 1].color).not.toBe(sorted[0].color);
    expect(model.legend).toEqual({ min: 0, max: 1 });
  });

  it("collapses vector values to their norm", () => {
    const values = new Array(9).fill([3, 4]);
    const model = contourModel({ name: "u", values, mesh: squareMesh() });
    expect(model.legend).toEqual({ min: 5, max: 5 });
  });

  it("rejects a payload whose length disagrees with the mesh", () => {
    expect(() => contourModel(field2d([1, 2, 3]))).toThrow(MeshMismatch);
  });
});

describe("pointCloudSlice", () => {
  it("keeps exactly the nodes inside the slab", () => {
    const mesh = cubeNodes(4); // 125 grid nodes at z in {0, .25, .5, .75, 1}
    const n = mesh.nodes.length / 3;
    const values = Array.from({ length: n }, (_, i) => mesh.nodes[i * 3 + 2]);
    const model = pointCloudSlice(
      { name: "u", values, mesh },
      { axis: 2, position: 0.5, thickness: 0.1 },
    );
    // manual filter over the payload: one grid plane of 25 nodes
    const expected = [];
    for (let i = 0; i < n; i++)
      if (Math.abs(mesh.nodes[i * 3 + 2] - 0.5) <= 0.05) expected.push(i);
    expect(expected).toHaveLength(25);
    expect(model.indices).toEqual(expected);
    expect(model.colors).toHaveLength(25);
    // legend still spans the full field, not just the slab
    expect(model.legend).toEqual({ min: 0, max: 1 });
  });

  it("slices along any axis", () => {
    const mesh = cubeNodes(2);
    const values = new Array(27).fill(1);
    const m = pointCloudSlice({ name: "u", values, mesh }, { axis: 0, position: 1, thickness: 0.2 });
    expect(m.indices).toHaveLength(9);
  });

  it("rejects 2D meshes", () => {
    expect(() =>
      pointCloudSlice(field2dStub(), { axis: 2, position: 0.5, thickness: 0.1 }),
    ).toThrow(MeshMismatch);
  });
});

function field2dStub(): FieldPayload {
  return { name: "u", values: new Array(9).fill(0), mesh: squareMesh() };
}
