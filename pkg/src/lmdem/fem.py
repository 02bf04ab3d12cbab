"""Linear finite element reference solver (Poisson, screened Poisson,
linear elasticity) sharing the quadrature tables and post-processing of
the energy-minimization solver. Dirichlet values are imposed by
row/column elimination, which makes this an exact oracle for the
approximate enforcement used in training."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .dem import DemProblem, SolveResult, eval_spatial, post_fields
from .materials import LinearElastic, Poisson, ScreenedPoisson


class UnsupportedModel(Exception):
    pass


class DuplicateConstraint(Exception):
    pass


class NoConvergence(Exception):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


@dataclass
class SparseSystem:
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    constraints: list[tuple[int, float]] = field(default_factory=list)


def _triplets_scalar(table, k: float):
    """Stiffness (plus k^2 mass) triplet blocks for a scalar field."""
    data = np.einsum("q,qad,qbd->qab", table.weights, table.grad, table.grad)
    if k != 0.0:
        data = data + k**2 * np.einsum("q,qa,qb->qab", table.weights, table.shape, table.shape)
    rows = np.broadcast_to(table.conn[:, :, None], data.shape)
    cols = np.broadcast_to(table.conn[:, None, :], data.shape)
    return rows.ravel(), cols.ravel(), data.ravel()


def _triplets_elastic(table, lam: float, mu: float, dim: int):
    """dof = node * dim + component; entries of the elastic stiffness
    w * (mu (gradNa . gradNb) delta_ij + mu dNa/dxj dNb/dxi
         + lam dNa/dxi dNb/dxj)."""
    w, g = table.weights, table.grad
    gg = np.einsum("q,qad,qbd->qab", w, g, g)
    term1 = np.einsum("qab,ij->qaibj", mu * gg, np.eye(dim))
    term2 = mu * np.einsum("q,qaj,qbi->qaibj", w, g, g)
    term3 = lam * np.einsum("q,qai,qbj->qaibj", w, g, g)
    data = term1 + term2 + term3
    dof = table.conn[:, :, None] * dim + np.arange(dim)[None, None, :]  # (q, a, i)
    rows = np.broadcast_to(dof[:, :, :, None, None], data.shape)
    cols = np.broadcast_to(dof[:, None, None, :, :], data.shape)
    return rows.ravel(), cols.ravel(), data.ravel()


def assemble(problem: DemProblem) -> SparseSystem:
    """Stiffness and load vector for the linear builtin models."""
    model = problem.material
    if not isinstance(model, (Poisson, ScreenedPoisson, LinearElastic)):
        raise UnsupportedModel(f"FEM supports linear models only, got {type(model).__name__}")
    table = problem.domain_table
    dim = problem.mesh.dim
    c = problem.components
    n_dof = table.n_nodes * c

    if isinstance(model, LinearElastic):
        lam, mu = model.lame(dim)
        rows, cols, data = _triplets_elastic(table, lam, mu, dim)
    else:
        k = model.k if isinstance(model, ScreenedPoisson) else 0.0
        rows, cols, data = _triplets_scalar(table, k)
    matrix = sparse.coo_matrix((data, (rows, cols)), shape=(n_dof, n_dof)).tocsr()

    rhs = np.zeros(n_dof)
    f_pts = problem.body_force_at_points
    rhs += problem.domain_table.scatter(
        d_values=table.weights[:, None] * f_pts
    ).ravel()
    t_table = problem.boundary_tables.get("Gamma_t")
    if t_table is not None:
        t_pts = problem.traction_at_points
        rhs += t_table.scatter(d_values=t_table.weights[:, None] * t_pts).ravel()
    return SparseSystem(matrix=matrix, rhs=rhs)


def constrain(system: SparseSystem, constraints: list[tuple[int, float]]):
    """Eliminate constrained dofs; returns (reduced system, free-dof
    indices, prescribed full vector)."""
    seen: dict[int, float] = {}
    for dof, value in constraints:
        if dof in seen and seen[dof] != value:
            raise DuplicateConstraint(
                f"dof {dof} constrained to both {seen[dof]} and {value}"
            )
        seen[dof] = value
    n = system.matrix.shape[0]
    fixed = np.array(sorted(seen), dtype=int)
    free = np.setdiff1d(np.arange(n), fixed)
    prescribed = np.zeros(n)
    if len(fixed):
        prescribed[fixed] = [seen[d] for d in fixed]
    matrix = system.matrix[free][:, free].tocsr()
    rhs = system.rhs[free] - system.matrix[free][:, fixed] @ prescribed[fixed]
    reduced = SparseSystem(matrix=matrix, rhs=rhs, constraints=list(seen.items()))
    return reduced, free, prescribed


def solve_system(system: SparseSystem, rtol: float = 1e-10, max_iter: int | None = None):
    """Jacobi-preconditioned conjugate gradients with a dense fallback
    for small systems. Raises NoConvergence on indefinite matrices or
    stagnation."""
    A = system.matrix
    b = system.rhs
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return np.zeros(n)
    diag = A.diagonal()
    inv_diag = np.where(np.abs(diag) > 0, 1.0 / np.where(diag != 0, diag, 1.0), 1.0)
    if np.any(diag <= 0):
        raise NoConvergence(0, float("inf"))
    x = np.zeros(n)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    limit = max_iter or max(20 * n, 1000)
    for it in range(limit):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise NoConvergence(it, float(np.linalg.norm(r) / b_norm))
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r) / b_norm
        if res < rtol:
            return x
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if n < 500:
        x = np.linalg.solve(A.toarray(), b)
        res = float(np.linalg.norm(A @ x - b) / b_norm)
        if res < 1e-8:
            return x
    raise NoConvergence(limit, float(np.linalg.norm(A @ x - b) / b_norm))


def dirichlet_constraints(problem: DemProblem) -> list[tuple[int, float]]:
    """(dof, value) pairs from the Dirichlet group's nodes."""
    mesh = problem.mesh
    c = problem.components
    node_ids = sorted(
        {i for e in mesh.group("Gamma_u") for i in mesh.elements[e][1]}
    )
    if not node_ids:
        return []
    values = eval_spatial(problem.dirichlet.value, mesh.nodes[node_ids], c)
    out = []
    for row, node in enumerate(node_ids):
        for comp in range(c):
            out.append((node * c + comp, float(values[row, comp])))
    return out


def fem_solve(problem: DemProblem) -> SolveResult:
    """Assemble, constrain, solve, and post-process with the shared
    derived-field machinery."""
    t0 = time.perf_counter()
    system = assemble(problem)
    reduced, free, full = constrain(system, dirichlet_constraints(problem))
    if len(free):
        full[free] = solve_system(reduced)
    nodal = full.reshape(-1, problem.components)
    fields = post_fields(problem, nodal)
    return SolveResult(
        nodal=nodal,
        history=[],
        stop_reason="fem",
        fields=fields,
        wall_time=time.perf_counter() - t0,
    )
