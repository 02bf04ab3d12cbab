"""Deep energy method solver with explicit mesh-based differentiation."""

from .dem import DemProblem, SolveResult, TrainingConfig, train
from .dirichlet import DirichletSpec
from .fem import fem_solve
from .io import FieldBundle, RunConfig, parse_config, serialize_config, write_vtk
from .materials import (
    Custom,
    GentThomas,
    Isihara,
    LinearElastic,
    NeoHookean,
    Poisson,
    ScreenedPoisson,
    lame_parameters,
)
from .mesh import GeoRequest, GmshMesher, Mesh, mesh_from_geo, parse_msh, write_msh
from .network import MlpConfig, init_mlp, load_params, save_params
from .quadrature import EvalTable, build_eval_table
from .runner import problem_from_config, run_config

__version__ = "0.1.0"

__all__ = [
    "Custom",
    "DemProblem",
    "DirichletSpec",
    "EvalTable",
    "FieldBundle",
    "GentThomas",
    "GeoRequest",
    "GmshMesher",
    "Isihara",
    "LinearElastic",
    "Mesh",
    "MlpConfig",
    "NeoHookean",
    "Poisson",
    "RunConfig",
    "ScreenedPoisson",
    "SolveResult",
    "TrainingConfig",
    "build_eval_table",
    "fem_solve",
    "init_mlp",
    "lame_parameters",
    "load_params",
    "mesh_from_geo",
    "parse_config",
    "parse_msh",
    "problem_from_config",
    "run_config",
    "save_params",
    "serialize_config",
    "train",
    "write_msh",
    "write_vtk",
]
