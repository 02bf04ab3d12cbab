import { describe, expect, it } from "vitest";

import { PanelState } from "../src/panels.js";
import { defaultConfig } from "./fixtures.js";

function readyState(): PanelState {
  // served defaults have no geometry source, so point at a mesh file
  const s = new PanelState(defaultConfig());
  s.set("geometry.msh", "plate.msh");
  return s;
}

describe("PanelState", () => {
  it("seeds every panel from the served defaults verbatim", () => {
    const s = new PanelState(defaultConfig());
    expect(s.matchesDefaults()).toBe(true);
    expect(s.config).toEqual(defaultConfig());
    expect(s.isDirty()).toBe(false);
  });

  it("tracks dirty flags per field", () => {
    const s = readyState();
    expect(s.isDirty("geometry.msh")).toBe(true);
    expect(s.isDirty("material.nu")).toBe(false);
    s.set("material.nu", 0.4);
    expect(s.isDirty("material.nu")).toBe(true);
    expect(s.matchesDefaults()).toBe(false);
  });

  it("requires exactly one geometry source", () => {
    const s = new PanelState(defaultConfig());
    expect(s.validate().map((i) => i.path)).toContain("geometry.msh");
    s.set("geometry.msh", "plate.msh");
    expect(s.validate()).toHaveLength(0);
    s.set("geometry.geo", "plate.geo"); // now both are set
    expect(s.validate().map((i) => i.path)).toContain("geometry.msh");
  });

  it("keeps submit disabled for nu = 0.7 with an inline message", () => {
    const s = readyState();
    s.set("material.model", "linear_elastic");
    expect(s.submitDisabled()).toBe(false);
    s.set("material.nu", 0.7);
    expect(s.submitDisabled()).toBe(true);
    const issue = s.validate().find((i) => i.path === "material.nu");
    expect(issue?.message).toMatch(/0.5/);
  });

  it("accepts elastic parameters given through a0/a1 instead of E/nu", () => {
    const s = readyState();
    s.set("material.model", "neo_hookean");
    s.set("material.nu", 0.9); // would be invalid, but a-form takes over
    s.set("material.a0", 0.5);
    s.set("material.a1", 1.5);
    expect(s.validate()).toHaveLength(0);
  });

  it("flags bad network and training settings", () => {
    const s = readyState();
    s.set("network.widths", [30, 0]);
    s.set("network.activation", "relu6");
    s.set("training.max_epochs", 0);
    s.set("training.lr", -1);
    s.set("training.solver", "magic");
    const paths = s.validate().map((i) => i.path);
    expect(paths).toContain("network.widths");
    expect(paths).toContain("network.activation");
    expect(paths).toContain("training.max_epochs");
    expect(paths).toContain("training.lr");
    expect(paths).toContain("training.solver");
  });

  it("requires an expression for the custom material", () => {
    const s = readyState();
    s.set("material.model", "custom");
    expect(s.validate().map((i) => i.path)).toContain("material.custom_energy");
    s.set("material.custom_energy", "0.5*(ux**2 + uy**2)");
    expect(s.validate()).toHaveLength(0);
  });
});
