/** Form state for the five configuration panels.
 *
 * The panel defaults are never hard-coded here: the state is seeded from
 * GET /defaults so the single source of truth stays on the server. Each
 * field tracks a dirty flag, and `validate` runs the client-side schema
 * checks; submission stays disabled until they all pass, so an invalid
 * value (say nu = 0.7) never produces a request.
 */

import type { PanelName, RunConfig } from "./types.js";

export interface FieldIssue {
  /** dotted path into the config, e.g. "material.nu" */
  path: string;
  message: string;
}

const MATERIAL_MODELS = [
  "poisson",
  "screened_poisson",
  "linear_elastic",
  "neo_hookean",
  "isihara",
  "gent_thomas",
  "custom",
];
const ACTIVATIONS = ["tanh", "silu", "gelu"];
const SOLVERS = ["dem", "fem", "both"];
const DIRICHLET_METHODS = ["smooth-distance+penalty", "hard-distance", "penalty-only"];

export class PanelState {
  config: RunConfig;
  private readonly pristine: string;
  private readonly dirtyPaths = new Set<string>();

  constructor(defaults: RunConfig) {
    this.config = JSON.parse(JSON.stringify(defaults));
    this.pristine = JSON.stringify(defaults);
  }

  /** Set one field by dotted path and mark it dirty. */
  set(path: string, value: unknown): void {
    const parts = path.split(".");
    let node: any = this.config;
    for (const p of parts.slice(0, -1)) node = node[p];
    node[parts[parts.length - 1]] = value;
    this.dirtyPaths.add(path);
  }

  isDirty(path?: string): boolean {
    if (path !== undefined) return this.dirtyPaths.has(path);
    return this.dirtyPaths.size > 0;
  }

  /** True when the whole config still equals the served defaults. */
  matchesDefaults(): boolean {
    return JSON.stringify(this.config) === this.pristine;
  }

  panel(name: PanelName): RunConfig[PanelName] {
    return this.config[name];
  }

  /** Client-side schema checks, mirroring what the service would reject
   * with a 400. Empty result means the config is submittable. */
  validate(): FieldIssue[] {
    const issues: FieldIssue[] = [];
    const bad = (path: string, message: string) => issues.push({ path, message });
    const c = this.config;

    const hasMsh = c.geometry.msh !== null && c.geometry.msh !== "";
    const hasGeo = c.geometry.geo !== null && c.geometry.geo !== "";
    if (hasMsh === hasGeo) bad("geometry.msh", "exactly one of msh / geo is required");
    if (c.geometry.dim !== 2 && c.geometry.dim !== 3) bad("geometry.dim", "dim must be 2 or 3");
    if (!(c.geometry.lc > 0)) bad("geometry.lc", "characteristic length must be positive");
    for (const key of ["domain_order", "boundary_order"] as const) {
      const v = c.geometry[key];
      if (!Number.isInteger(v) || v < 1 || v > 3) bad(`geometry.${key}`, "order must be 1..3");
    }

    if (!MATERIAL_MODELS.includes(c.material.model))
      bad("material.model", `unknown model "${c.material.model}"`);
    if (c.material.model === "linear_elastic" || c.material.model === "neo_hookean") {
      if (c.material.a0 === null) {
        if (!(c.material.E > 0)) bad("material.E", "E must be positive");
        if (!(c.material.nu > 0 && c.material.nu < 0.5))
          bad("material.nu", "nu must be in (0, 0.5)");
      }
    }
    if (c.material.model === "screened_poisson" && !(c.material.k >= 0))
      bad("material.k", "k must be non-negative");
    if (c.material.model === "custom" && !c.material.custom_energy)
      bad("material.custom_energy", "custom model needs an energy expression");

    if (!DIRICHLET_METHODS.includes(c.boundary.dirichlet.method))
      bad("boundary.dirichlet.method", "unknown enforcement method");
    if (!(c.boundary.dirichlet.tau > 0)) bad("boundary.dirichlet.tau", "tau must be positive");
    if (!(c.boundary.dirichlet.beta > 0)) bad("boundary.dirichlet.beta", "beta must be positive");

    if (!Array.isArray(c.network.widths) || c.network.widths.length === 0)
      bad("network.widths", "at least one hidden layer");
    else if (c.network.widths.some((w) => !Number.isInteger(w) || w < 1))
      bad("network.widths", "widths must be positive integers");
    if (!ACTIVATIONS.includes(c.network.activation))
      bad("network.activation", `unknown activation "${c.network.activation}"`);

    if (!Number.isInteger(c.training.max_epochs) || c.training.max_epochs < 1)
      bad("training.max_epochs", "max_epochs must be a positive integer");
    if (!(c.training.lr > 0)) bad("training.lr", "learning rate must be positive");
    if (!(c.training.lr_decay > 0 && c.training.lr_decay <= 1))
      bad("training.lr_decay", "lr_decay must be in (0, 1]");
    if (!SOLVERS.includes(c.training.solver))
      bad("training.solver", `solver must be one of ${SOLVERS.join("/")}`);
    if (!Number.isInteger(c.training.early_stop.window) || c.training.early_stop.window < 2)
      bad("training.early_stop.window", "window must be an integer >= 2");
    if (!(c.training.early_stop.rho > 0))
      bad("training.early_stop.rho", "rho must be positive");

    return issues;
  }

  submitDisabled(): boolean {
    return this.validate().length > 0;
  }
}
