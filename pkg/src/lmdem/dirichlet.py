"""Admissible trial fields for essential boundary conditions.

The trial field is u = u_p + D * u_g: a particular network fitted to the
prescribed values, a distance factor D that vanishes (hard) or nearly
vanishes (smoothed) on the Dirichlet boundary, and the free network that
energy minimization trains. A penalty addend covers the residual boundary
error of the smoothed variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import MlpConfig, MlpParams, OptimState, adam_step, forward_nodes, vjp_params

ENFORCEMENT_METHODS = ("smooth-distance+penalty", "hard-distance", "penalty-only")


class EmptyBoundary(Exception):
    pass


@dataclass
class DirichletSpec:
    """Prescribed boundary values and the enforcement strategy.

    value entries are either numbers or spatial expressions over x, y, z
    (one per solution component)."""

    value: list = field(default_factory=lambda: [0.0])
    method: str = "smooth-distance+penalty"
    tau: float = 0.001
    beta: float = 1000.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.method not in ENFORCEMENT_METHODS:
            raise ValueError(f"method must be one of {ENFORCEMENT_METHODS}")


def _segment_sq_dist(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.sum((points - a) ** 2, axis=1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.sum((points - closest) ** 2, axis=1)


def _triangle_sq_dist(points: np.ndarray, a, b, c) -> np.ndarray:
    """Squared point-triangle distance (region classification), vectorized
    over points."""
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = points - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = points - c
    d5 = cp @ ab
    d6 = cp @ ac

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    closest = np.empty_like(points)
    done = np.zeros(len(points), dtype=bool)

    def assign(mask, value):
        m = mask & ~done
        closest[m] = value[m] if value.ndim == 2 else value
        done[m] = True

    # vertex regions
    assign((d1 <= 0) & (d2 <= 0), np.broadcast_to(a, points.shape))
    assign((d3 >= 0) & (d4 <= d3), np.broadcast_to(b, points.shape))
    assign((d6 >= 0) & (d5 <= d6), np.broadcast_to(c, points.shape))
    # edge AB
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
    assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v[:, None] * ab)
    # edge AC
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
    assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w[:, None] * ac)
    # edge BC
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where((d4 - d3) + (d5 - d6) != 0, (d4 - d3) / ((d4 - d3) + (d5 - d6)), 0.0)
    assign((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + t[:, None] * (c - b))
    # interior
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v_in = np.where(denom != 0, vb / denom, 0.0)
        w_in = np.where(denom != 0, vc / denom, 0.0)
    assign(np.ones(len(points), dtype=bool), a + v_in[:, None] * ab + w_in[:, None] * ac)
    return np.sum((points - closest) ** 2, axis=1)


def facet_sq_distances(points, facets) -> np.ndarray:
    """Squared distance from each point to each facet, shape (P, M)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not facets:
        raise EmptyBoundary("no Dirichlet facets")
    cols = []
    for f in facets:
        f = np.asarray(f, dtype=float)
        if len(f) == 2:
            cols.append(_segment_sq_dist(points, f[0], f[1]))
        else:
            cols.append(_triangle_sq_dist(points, f[0], f[1], f[2]))
    return np.stack(cols, axis=1)


def hard_distance(points, facets) -> np.ndarray:
    """Exact Euclidean distance to the nearest facet point."""
    d2 = facet_sq_distances(points, facets)
    return np.sqrt(d2.min(axis=1))


def smooth_distance(points, facets, tau: float) -> np.ndarray:
    """Log-sum-exp softened squared distance:
    D_s = -tau * log((1/M) sum_i exp(-d_i^2 / tau)), evaluated with a
    shift by min d_i^2 for stability. Satisfies
    d_min^2 <= D_s <= d_min^2 + tau * log(M)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    d2 = facet_sq_distances(points, facets)
    m = d2.min(axis=1)
    shifted = np.exp(-(d2 - m[:, None]) / tau)
    return m - tau * np.log(shifted.mean(axis=1))


def fit_particular(
    points: np.ndarray,
    targets: np.ndarray,
    cfg: MlpConfig,
    steps: int = 2000,
    lr: float = 1e-2,
) -> tuple[MlpParams, float]:
    """Fit the particular network to prescribed Dirichlet values by MSE.

    Returns the fitted (then frozen) parameters and the final MSE."""
    points = np.asarray(points, dtype=float)
    targets = np.atleast_2d(np.asarray(targets, dtype=float).T).T
    if len(points) < 1:
        raise ValueError("need at least one Dirichlet sample")
    from .network import init_mlp

    params = init_mlp(cfg)
    state = OptimState.for_params(params, lr=lr)
    n = len(points)
    mse = np.inf
    for _ in range(steps):
        out = forward_nodes(params, points, cfg.activation)
        resid = out - targets
        mse = float(np.mean(resid**2))
        if mse < 1e-14:
            break
        cot = 2.0 * resid / resid.size
        grads = vjp_params(params, points, cot, cfg.activation)
        params, state = adam_step(params, grads, state)
    out = forward_nodes(params, points, cfg.activation)
    mse = float(np.mean((out - targets) ** 2))
    return params, mse


def compose_admissible(up_nodal: np.ndarray, ug_nodal: np.ndarray, distance_nodal: np.ndarray) -> np.ndarray:
    """u = u_p + D * u_g, per node and component."""
    up = np.atleast_2d(np.asarray(up_nodal, dtype=float).T).T
    ug = np.atleast_2d(np.asarray(ug_nodal, dtype=float).T).T
    d = np.asarray(distance_nodal, dtype=float)
    return up + d[:, None] * ug


def penalty_loss(table, values: np.ndarray, targets: np.ndarray, beta: float):
    """beta times the quadrature-weighted mean of |u - ubar|^2 over the
    Dirichlet boundary. Returns (value, d/d values)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    values = np.atleast_2d(np.asarray(values, dtype=float).T).T
    targets = np.atleast_2d(np.asarray(targets, dtype=float).T).T
    diff = values - targets
    measure = table.weights.sum()
    loss = beta * float(table.weights @ np.sum(diff**2, axis=1)) / measure
    grad = 2.0 * beta * table.weights[:, None] * diff / measure
    return loss, grad
