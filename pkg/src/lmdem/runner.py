"""Turn a validated RunConfig into solver runs and on-disk artifacts."""

from __future__ import annotations

import json
import os

import numpy as np

from .dem import DemProblem, TrainingConfig, train
from .dirichlet import DirichletSpec
from .fem import fem_solve
from .io import FieldBundle, RunConfig, write_history, write_vtk
from .materials import (
    Custom,
    GentThomas,
    Isihara,
    LinearElastic,
    NeoHookean,
    Poisson,
    ScreenedPoisson,
)
from .mesh import GeoRequest, Mesh, mesh_from_geo, parse_msh
from .network import MlpConfig, save_params


def material_from_config(mat: dict, dim: int):
    model = mat["model"]
    if model == "poisson":
        return Poisson()
    if model == "screened_poisson":
        return ScreenedPoisson(k=float(mat["k"]))
    if model == "linear_elastic":
        return LinearElastic(E=float(mat["E"]), nu=float(mat["nu"]), plane=mat["plane"])
    if model == "neo_hookean":
        if mat["a0"] is not None:
            return NeoHookean(a0=float(mat["a0"]), a1=float(mat["a1"]))
        return NeoHookean(E=float(mat["E"]), nu=float(mat["nu"]))
    if model == "isihara":
        params = {k: float(mat[k]) for k in ("a0", "a1", "a2", "a3") if mat[k] is not None}
        return Isihara(**params)
    if model == "gent_thomas":
        params = {k: float(mat[k]) for k in ("a0", "a1", "a2") if mat[k] is not None}
        return GentThomas(**params)
    if model == "custom":
        return Custom.from_text(mat["custom_energy"], dim)
    raise ValueError(f"unknown material model {model}")


def load_mesh(config: RunConfig, mesher=None) -> Mesh:
    geom = config.geometry
    if geom["msh"] is not None:
        with open(geom["msh"], "rb") as fh:
            return parse_msh(fh.read())
    req = GeoRequest(
        geo_text=geom["geo"], characteristic_length=geom["lc"], dim=geom["dim"]
    )
    return mesh_from_geo(req, mesher)


def problem_from_config(config: RunConfig, mesh: Mesh | None = None, mesher=None) -> DemProblem:
    if mesh is None:
        mesh = load_mesh(config, mesher)
    material = material_from_config(config.material, mesh.dim)
    d = config.boundary["dirichlet"]
    dirichlet = DirichletSpec(
        value=d["value"] if isinstance(d["value"], list) else [d["value"]],
        method=d["method"],
        tau=float(d["tau"]),
        beta=float(d["beta"]),
    )
    net = config.network
    tr = config.training
    problem = DemProblem(
        mesh=mesh,
        material=material,
        dirichlet=dirichlet,
        neumann=config.boundary["neumann"]["value"],
        body_force=config.boundary["body_force"],
        mlp=None,
        training=TrainingConfig(
            max_epochs=int(tr["max_epochs"]),
            lr=float(tr["lr"]),
            lr_decay=float(tr["lr_decay"]),
            early_stop_window=int(tr["early_stop"]["window"]),
            early_stop_rho=float(tr["early_stop"]["rho"]),
            particular_steps=int(tr["particular_steps"]),
            particular_lr=float(tr["particular_lr"]),
        ),
        domain_order=int(config.geometry["domain_order"]),
        boundary_order=int(config.geometry["boundary_order"]),
    )
    problem.mlp = MlpConfig(
        input_dim=mesh.dim,
        output_dim=problem.components,
        hidden=list(net["widths"]),
        activation=net["activation"],
        seed=int(net["seed"]),
    )
    return problem


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    """Relative L2 difference of two nodal magnitude arrays."""
    denom = np.linalg.norm(b)
    if denom == 0:
        return float(np.linalg.norm(a - b))
    return float(np.linalg.norm(a - b) / denom)


def run_config(
    config: RunConfig,
    outdir: str,
    mesh: Mesh | None = None,
    mesher=None,
    progress=None,
    should_stop=None,
    initial_params=None,
) -> dict:
    """Run the configured solver(s), write all artifacts into outdir, and
    return a JSON-safe summary."""
    os.makedirs(outdir, exist_ok=True)
    problem = problem_from_config(config, mesh, mesher)
    solver = config.training["solver"]
    summary: dict = {"solver": solver, "dim": problem.mesh.dim}
    fields_out: dict[str, np.ndarray] = {}

    dem_result = None
    if solver in ("dem", "both"):
        dem_result = train(
            problem,
            progress=progress,
            should_stop=should_stop,
            initial_params=initial_params,
        )
        write_history(dem_result.history, os.path.join(outdir, "history.csv"))
        write_vtk(
            FieldBundle(problem.mesh, point_data=dem_result.fields),
            os.path.join(outdir, "solution_dem.vtk"),
        )
        save_params(dem_result.params, os.path.join(outdir, "model.bin"))
        summary["dem"] = {
            "final_loss": dem_result.history[-1] if dem_result.history else None,
            "epochs": len(dem_result.history),
            "stop_reason": dem_result.stop_reason,
            "wall_time": dem_result.wall_time,
        }
        for name, arr in dem_result.fields.items():
            fields_out[f"dem_{name}"] = arr

    fem_result = None
    if solver in ("fem", "both"):
        fem_result = fem_solve(problem)
        write_vtk(
            FieldBundle(problem.mesh, point_data=fem_result.fields),
            os.path.join(outdir, "solution_fem.vtk"),
        )
        summary["fem"] = {"wall_time": fem_result.wall_time}
        for name, arr in fem_result.fields.items():
            fields_out[f"fem_{name}"] = arr

    if dem_result is not None and fem_result is not None:
        mag = "magnitude"
        summary["rel_l2_difference"] = relative_difference(
            dem_result.fields[mag], fem_result.fields[mag]
        )

    np.savez(os.path.join(outdir, "fields.npz"), **fields_out)
    from .mesh import write_msh

    write_msh(problem.mesh, os.path.join(outdir, "mesh.msh"))
    with open(os.path.join(outdir, "result.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary
