"""Run configuration schema, loss-history files, and legacy VTK export.

The config file is YAML with five sections (geometry, material,
boundary, network, training); parsing fills defaults and rejects
unknown keys with path-qualified errors, and parse -> serialize is
idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .mesh import Mesh


class IoError(Exception):
    pass


class SchemaError(Exception):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


MATERIAL_MODELS = (
    "poisson",
    "screened_poisson",
    "linear_elastic",
    "neo_hookean",
    "isihara",
    "gent_thomas",
    "custom",
)

_GEOMETRY_DEFAULTS = {
    "msh": None,
    "geo": None,
    "dim": 2,
    "lc": 1.0,
    "domain_order": 2,
    "boundary_order": 2,
}
_MATERIAL_DEFAULTS = {
    "model": "poisson",
    "k": 1.0,
    "E": 1000.0,
    "nu": 0.3,
    "plane": "strain",
    "a0": None,
    "a1": None,
    "a2": None,
    "a3": None,
    "custom_energy": None,
}
_BOUNDARY_DEFAULTS = {
    "dirichlet": {
        "value": 0.0,
        "method": "smooth-distance+penalty",
        "tau": 0.001,
        "beta": 1000.0,
    },
    "neumann": {"value": 0.0},
    "body_force": 0.0,
}
_NETWORK_DEFAULTS = {"widths": [30, 30, 30], "activation": "tanh", "seed": 0}
_TRAINING_DEFAULTS = {
    "max_epochs": 3000,
    "lr": 0.01,
    "lr_decay": 0.01,
    "early_stop": {"window": 200, "rho": 0.05},
    "solver": "dem",
    "particular_steps": 2000,
    "particular_lr": 0.01,
}


@dataclass
class RunConfig:
    geometry: dict
    material: dict
    boundary: dict
    network: dict
    training: dict

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "material": self.material,
            "boundary": self.boundary,
            "network": self.network,
            "training": self.training,
        }


def _fill(defaults: dict, given: dict, path: str) -> dict:
    if not isinstance(given, dict):
        raise SchemaError(path, f"expected a mapping, got {type(given).__name__}")
    out = {}
    for key, default in defaults.items():
        if key in given:
            value = given[key]
            if isinstance(default, dict) and default:
                value = _fill(default, value, f"{path}.{key}")
            out[key] = value
        else:
            out[key] = {k: v for k, v in default.items()} if isinstance(default, dict) else default
    for key in given:
        if key not in defaults:
            raise SchemaError(f"{path}.{key}", "unknown key")
    return out


def _require(cond: bool, path: str, reason: str):
    if not cond:
        raise SchemaError(path, reason)


def validate_config(raw: dict) -> RunConfig:
    _require(isinstance(raw, dict), "<root>", "config must be a mapping")
    for section in ("geometry",):
        _require(section in raw, section, "required section missing")
    known = {"geometry", "material", "boundary", "network", "training"}
    for key in raw:
        _require(key in known, key, "unknown section")

    geometry = _fill(_GEOMETRY_DEFAULTS, raw.get("geometry", {}), "geometry")
    material = _fill(_MATERIAL_DEFAULTS, raw.get("material", {}), "material")
    boundary = _fill(_BOUNDARY_DEFAULTS, raw.get("boundary", {}), "boundary")
    network = _fill(_NETWORK_DEFAULTS, raw.get("network", {}), "network")
    training = _fill(_TRAINING_DEFAULTS, raw.get("training", {}), "training")

    has_msh = geometry["msh"] is not None
    has_geo = geometry["geo"] is not None
    _require(has_msh != has_geo, "geometry", "exactly one of 'msh' or 'geo' is required")
    _require(geometry["dim"] in (2, 3), "geometry.dim", "dim must be 2 or 3")
    _require(geometry["lc"] > 0, "geometry.lc", "lc must be positive")
    for key in ("domain_order", "boundary_order"):
        _require(geometry[key] in (1, 2, 3), f"geometry.{key}", "order must be 1, 2, or 3")

    _require(
        material["model"] in MATERIAL_MODELS,
        "material.model",
        f"model must be one of {MATERIAL_MODELS}",
    )
    if material["model"] == "custom":
        _require(
            isinstance(material["custom_energy"], str) and material["custom_energy"].strip(),
            "material.custom_energy",
            "custom model requires a one-line energy expression",
        )
    if material["model"] in ("linear_elastic",):
        _require(material["E"] > 0, "material.E", "E must be positive")
        _require(-1 < material["nu"] < 0.5, "material.nu", "nu must be in (-1, 0.5)")

    d = boundary["dirichlet"]
    _require(d["tau"] > 0, "boundary.dirichlet.tau", "tau must be positive")
    _require(d["beta"] > 0, "boundary.dirichlet.beta", "beta must be positive")
    _require(
        d["method"] in ("smooth-distance+penalty", "hard-distance", "penalty-only"),
        "boundary.dirichlet.method",
        "unknown enforcement method",
    )

    widths = network["widths"]
    _require(
        isinstance(widths, list) and widths and all(isinstance(w, int) and w >= 1 for w in widths),
        "network.widths",
        "widths must be a non-empty list of ints >= 1",
    )
    _require(
        network["activation"] in ("tanh", "silu", "gelu"),
        "network.activation",
        "activation must be tanh, silu, or gelu",
    )

    _require(training["max_epochs"] >= 1, "training.max_epochs", "must be >= 1")
    _require(training["lr"] > 0, "training.lr", "must be positive")
    es = training["early_stop"]
    _require(es["window"] >= 2, "training.early_stop.window", "must be >= 2")
    _require(es["rho"] > 0, "training.early_stop.rho", "must be positive")
    _require(
        training["solver"] in ("dem", "fem", "both"),
        "training.solver",
        "solver must be dem, fem, or both",
    )
    return RunConfig(geometry, material, boundary, network, training)


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError("<root>", f"invalid YAML: {exc}")
    return validate_config(raw)


def serialize_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=True, default_flow_style=False)


# Loss history ---------------------------------------------------------------

def write_history(history, path: str) -> None:
    """Two-column epoch,loss text; floats keep 17 significant digits so the
    round trip is exact."""
    try:
        with open(path, "w") as fh:
            fh.write("epoch,loss\n")
            for i, loss in enumerate(history):
                fh.write(f"{i},{float(loss):.17g}\n")
    except OSError as exc:
        raise IoError(str(exc))


def read_history(path: str) -> list[float]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(str(exc))
    return [float(line.split(",")[1]) for line in lines[1:] if line.strip()]


# Legacy VTK -----------------------------------------------------------------

_VTK_TYPES = {"tri3": 5, "tri3-surface": 5, "quad4": 9, "tet4": 10}


@dataclass
class FieldBundle:
    mesh: Mesh
    point_data: dict[str, np.ndarray] = field(default_factory=dict)
    cell_data: dict[str, np.ndarray] = field(default_factory=dict)


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_vtk(bundle: FieldBundle, path: str) -> None:
    """Legacy ASCII VTK unstructured grid; output is byte-deterministic.

    2D points are zero-padded to three components; line elements are
    omitted (only tri/quad/tet cells are written)."""
    mesh = bundle.mesh
    cells = [
        (kind, conn) for kind, conn in mesh.elements if kind in _VTK_TYPES
    ]
    lines = [
        "# vtk DataFile Version 3.0",
        "lmdem field export",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(mesh.nodes)} double",
    ]
    for xyz in mesh.nodes:
        coords = list(xyz) + [0.0] * (3 - mesh.dim)
        lines.append(" ".join(_fmt(v) for v in coords))
    total = sum(len(conn) + 1 for _, conn in cells)
    lines.append(f"CELLS {len(cells)} {total}")
    for _, conn in cells:
        lines.append(f"{len(conn)} " + " ".join(str(i) for i in conn))
    lines.append(f"CELL_TYPES {len(cells)}")
    for kind, _ in cells:
        lines.append(str(_VTK_TYPES[kind]))
    if bundle.point_data:
        lines.append(f"POINT_DATA {len(mesh.nodes)}")
        for name in sorted(bundle.point_data):
            values = np.asarray(bundle.point_data[name], dtype=float)
            if values.ndim != 1 and not (values.ndim == 2 and values.shape[1] in (2, 3)):
                raise IoError(f"field {name}: expected scalar or vector point data")
            if len(values) != len(mesh.nodes):
                raise IoError(f"field {name}: length {len(values)} != node count")
            if values.ndim == 1:
                lines.append(f"SCALARS {name} double 1")
                lines.append("LOOKUP_TABLE default")
                lines.extend(_fmt(v) for v in values)
            else:
                lines.append(f"VECTORS {name} double")
                for row in values:
                    padded = list(row) + [0.0] * (3 - len(row))
                    lines.append(" ".join(_fmt(v) for v in padded))
    if bundle.cell_data:
        lines.append(f"CELL_DATA {len(cells)}")
        for name in sorted(bundle.cell_data):
            values = np.asarray(bundle.cell_data[name], dtype=float)
            if len(values) != len(cells):
                raise IoError(f"cell field {name}: length {len(values)} != cell count")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_fmt(v) for v in values)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(str(exc))
