import { describe, expect, it } from "vitest";

import {
  DIRICHLET_COLOR,
  NEUMANN_COLOR,
  buildRenderModel,
  drawMesh,
  type StrokeContext,
} from "../src/meshView.js";
import { squareMesh } from "./fixtures.js";

describe("buildRenderModel", () => {
  it("colors Dirichlet facets red and Neumann facets green", () => {
    const model = buildRenderModel(squareMesh());
    const byColor = (c: string) => model.boundary.filter((b) => b.color === c);
    expect(byColor(DIRICHLET_COLOR)).toHaveLength(2); // left edge, 2 segments
    expect(byColor(NEUMANN_COLOR)).toHaveLength(2); // right edge
    // the red facets really are the left edge (x = 0 after normalization)
    for (const facet of byColor(DIRICHLET_COLOR)) {
      for (const i of facet.conn) expect(model.points[i][0]).toBe(0);
    }
    for (const facet of byColor(NEUMANN_COLOR)) {
      for (const i of facet.conn) expect(model.points[i][0]).toBe(1);
    }
  });

  it("normalizes coordinates to the unit square", () => {
    const mesh = squareMesh();
    // shift and scale the mesh; the render model should be unchanged
    mesh.nodes = mesh.nodes.map((v, i) => (i % 2 === 0 ? 10 + 4 * v : -3 + 4 * v));
    const model = buildRenderModel(mesh);
    const xs = model.points.map((p) => p[0]);
    expect(Math.min(...xs)).toBe(0);
    expect(Math.max(...xs)).toBe(1);
  });

  it("deduplicates shared triangle edges", () => {
    const model = buildRenderModel(squareMesh());
    // 2x2 crossed grid: 9 nodes, 8 triangles; euler: edges = 16
    expect(model.edges).toHaveLength(16);
    const keys = new Set(model.edges.map(([a, b]) => (a < b ? `${a}-${b}` : `${b}-${a}`)));
    expect(keys.size).toBe(model.edges.length);
  });

  it("handles meshes with no boundary groups", () => {
    const mesh = squareMesh();
    mesh.groups = { Omega: mesh.groups.Omega };
    expect(buildRenderModel(mesh).boundary).toHaveLength(0);
  });
});

describe("drawMesh", () => {
  it("issues one stroked path per edge and boundary facet", () => {
    const model = buildRenderModel(squareMesh());
    const strokes: string[] = [];
    const ctx: StrokeContext = {
      strokeStyle: "",
      lineWidth: 0,
      beginPath() {},
      moveTo() {},
      lineTo() {},
      stroke() {
        strokes.push(String(this.strokeStyle));
      },
    };
    drawMesh(ctx, model, 400, 400);
    expect(strokes).toHaveLength(model.edges.length + model.boundary.length);
    expect(strokes.filter((s) => s === DIRICHLET_COLOR)).toHaveLength(2);
    expect(strokes.filter((s) => s === NEUMANN_COLOR)).toHaveLength(2);
  });
});
