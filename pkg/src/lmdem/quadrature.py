"""Reference-element shape functions, quadrature rules, and EvalTables.

Fields are represented by nodal values; values and spatial gradients at
quadrature points come from shape-function interpolation. Precomputing
the physical shape gradients once per mesh removes spatial derivatives
from the training loop entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .mesh import Mesh, BOUNDARY_KINDS


class UnsupportedOrder(Exception):
    pass


class DegenerateElement(Exception):
    pass


# Reference nodes per kind. tri/tet use barycentric-style coordinates on
# the unit simplex; quad/line live on [-1, 1]^d.
_REF_NODES = {
    "line2": np.array([[-1.0], [1.0]]),
    "tri3": np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    "quad4": np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
    "tet4": np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    ),
}

REF_MEASURE = {"line2": 2.0, "tri3": 0.5, "quad4": 4.0, "tet4": 1.0 / 6.0}


@dataclass
class QuadratureRule:
    kind: str
    points: np.ndarray  # (q, ref_dim)
    weights: np.ndarray  # (q,)


def _gauss_1d(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def rule_for(kind: str, order: int) -> QuadratureRule:
    """Quadrature rule exact for total polynomial degree >= order."""
    if order not in (1, 2, 3):
        raise UnsupportedOrder(f"order {order} not in {{1, 2, 3}}")
    if kind in ("line2", "quad4"):
        n = 1 if order == 1 else 2
        x, w = _gauss_1d(n)
        if kind == "line2":
            return QuadratureRule(kind, x[:, None], w)
        pts = np.array([[xi, xj] for xi in x for xj in x])
        wts = np.array([wi * wj for wi in w for wj in w])
        return QuadratureRule(kind, pts, wts)
    if kind == "tri3":
        if order == 1:
            return QuadratureRule(kind, np.array([[1 / 3, 1 / 3]]), np.array([0.5]))
        if order == 2:
            pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
            return QuadratureRule(kind, pts, np.full(3, 1 / 6))
        # 6-point symmetric rule (degree 4); all weights positive.
        a, b = 0.445948490915965, 0.091576213509771
        wa, wb = 0.223381589678011, 0.109951743655322
        pts = np.array(
            [
                [a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
                [b, b], [1 - 2 * b, b], [b, 1 - 2 * b],
            ]
        )
        wts = 0.5 * np.array([wa, wa, wa, wb, wb, wb])
        return QuadratureRule(kind, pts, wts)
    if kind == "tet4":
        if order == 1:
            return QuadratureRule(kind, np.array([[0.25, 0.25, 0.25]]), np.array([1 / 6]))
        if order == 2:
            a = (5 + 3 * np.sqrt(5)) / 20
            b = (5 - np.sqrt(5)) / 20
            pts = np.array(
                [[b, b, b], [a, b, b], [b, a, b], [b, b, a]]
            )
            return QuadratureRule(kind, pts, np.full(4, 1 / 24))
        return _tet_conical(2)  # 8 points, degree 3, positive weights
    raise UnsupportedOrder(f"unknown element kind {kind}")


def _tet_conical(n: int) -> QuadratureRule:
    """Stroud conical-product rule on the unit tetrahedron (degree 2n-1)."""
    def jac01(alpha):
        x, w = roots_jacobi(n, alpha, 0.0)
        return (x + 1) / 2, w / 2 ** (alpha + 1)

    x1, w1 = jac01(2.0)
    x2, w2 = jac01(1.0)
    x3, w3 = jac01(0.0)
    pts, wts = [], []
    for a, wa in zip(x1, w1):
        for b, wb in zip(x2, w2):
            for c, wc in zip(x3, w3):
                xi = a
                eta = b * (1 - a)
                zeta = c * (1 - a) * (1 - b)
                pts.append([xi, eta, zeta])
                wts.append(wa * wb * wc)
    return QuadratureRule("tet4", np.array(pts), np.array(wts))


def shape_eval(kind: str, ref_point) -> np.ndarray:
    """Shape function values N_i at a reference point."""
    p = np.asarray(ref_point, dtype=float)
    if kind == "line2":
        (xi,) = p
        return np.array([(1 - xi) / 2, (1 + xi) / 2])
    if kind in ("tri3", "tri3-surface"):
        xi, eta = p
        return np.array([1 - xi - eta, xi, eta])
    if kind == "quad4":
        xi, eta = p
        return 0.25 * np.array(
            [(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
             (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)]
        )
    if kind == "tet4":
        xi, eta, zeta = p
        return np.array([1 - xi - eta - zeta, xi, eta, zeta])
    raise ValueError(f"unknown element kind {kind}")


def shape_grad_ref(kind: str, ref_point) -> np.ndarray:
    """Shape gradients dN_i/dxi_j, shape (n_nodes, ref_dim)."""
    p = np.asarray(ref_point, dtype=float)
    if kind == "line2":
        return np.array([[-0.5], [0.5]])
    if kind in ("tri3", "tri3-surface"):
        return np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    if kind == "quad4":
        xi, eta = p
        return 0.25 * np.array(
            [[-(1 - eta), -(1 - xi)], [(1 - eta), -(1 + xi)],
             [(1 + eta), (1 + xi)], [-(1 + eta), (1 - xi)]]
        )
    if kind == "tet4":
        return np.array(
            [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
    raise ValueError(f"unknown element kind {kind}")


def physical_gradients(coords, kind: str, ref_point):
    """Physical shape gradients and Jacobian determinant at a point.

    coords is (n_nodes, dim). Raises DegenerateElement for collapsed or
    negatively oriented elements.
    """
    coords = np.asarray(coords, dtype=float)
    dref = shape_grad_ref(kind, ref_point)  # (n, rdim)
    jac = coords.T @ dref  # (dim, rdim)
    det = np.linalg.det(jac)
    if det < 1e-14:
        raise DegenerateElement(
            f"{kind} element has det(J) = {det:.3e} (collapsed or inverted)"
        )
    grads = dref @ np.linalg.inv(jac)  # (n, dim)
    return grads, det


def _facet_scale(coords, kind: str, ref_point) -> float:
    """Surface-measure scale |J| for a boundary facet (length or area)."""
    coords = np.asarray(coords, dtype=float)
    dref = shape_grad_ref(kind, ref_point)
    jac = coords.T @ dref  # (dim, rdim) tangent columns
    if jac.shape[1] == 1:
        return float(np.linalg.norm(jac[:, 0]))
    return float(np.linalg.norm(np.cross(jac[:, 0], jac[:, 1])))


@dataclass
class EvalTable:
    """Quadrature points with shape data, for one element family.

    weights already include |det J| (or the facet measure scale); conn,
    shape and grad are zero-padded to the widest element in the table so
    interpolation is a single einsum.
    """

    points: np.ndarray   # (q, dim) global coordinates
    weights: np.ndarray  # (q,)
    element: np.ndarray  # (q,) owning element index
    conn: np.ndarray     # (q, n_max) node indices, zero-padded
    shape: np.ndarray    # (q, n_max) N_i, zero-padded
    grad: np.ndarray     # (q, n_max, dim) physical gradients, zero-padded
    n_nodes: int         # mesh node count

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def interpolate(self, nodal: np.ndarray) -> np.ndarray:
        """Field values at the table points from nodal values (n, c)."""
        nodal = np.atleast_2d(np.asarray(nodal, dtype=float).T).T
        return np.einsum("qa,qac->qc", self.shape, nodal[self.conn])

    def gradient(self, nodal: np.ndarray) -> np.ndarray:
        """Field gradients (q, c, dim) at the table points."""
        nodal = np.atleast_2d(np.asarray(nodal, dtype=float).T).T
        return np.einsum("qad,qac->qcd", self.grad, nodal[self.conn])

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(values))

    def scatter(self, d_values=None, d_grads=None) -> np.ndarray:
        """Transpose of interpolate/gradient: accumulate per-point
        cotangents (q, c) and/or (q, c, dim) into a nodal array (n, c)."""
        if d_values is not None:
            c = np.atleast_2d(np.asarray(d_values).T).T.shape[1]
        else:
            c = np.asarray(d_grads).shape[1]
        out = np.zeros((self.n_nodes, c))
        if d_values is not None:
            dv = np.atleast_2d(np.asarray(d_values, dtype=float).T).T
            contrib = np.einsum("qa,qc->qac", self.shape, dv)
            np.add.at(out, self.conn, contrib)
        if d_grads is not None:
            dg = np.asarray(d_grads, dtype=float)
            contrib = np.einsum("qad,qcd->qac", self.grad, dg)
            np.add.at(out, self.conn, contrib)
        return out


def _table_from_elements(mesh: Mesh, elem_ids, order: int, boundary: bool) -> EvalTable:
    points, weights, owners, conns, shapes, grads = [], [], [], [], [], []
    n_max = max(len(mesh.elements[e][1]) for e in elem_ids)
    dim = mesh.dim
    for e in elem_ids:
        kind, conn = mesh.elements[e]
        rule_kind = "tri3" if kind == "tri3-surface" else kind
        rule = rule_for(rule_kind, order)
        coords = mesh.nodes[list(conn)]
        for rp, w in zip(rule.points, rule.weights):
            n_vals = shape_eval(kind, rp)
            if boundary:
                scale = _facet_scale(coords, kind, rp)
                g = np.zeros((len(conn), dim))
            else:
                try:
                    g, scale = physical_gradients(coords, kind, rp)
                except DegenerateElement as exc:
                    raise DegenerateElement(f"element {e}: {exc}") from None
            pad = n_max - len(conn)
            points.append(n_vals @ coords)
            weights.append(w * scale)
            owners.append(e)
            conns.append(list(conn) + [0] * pad)
            shapes.append(np.concatenate([n_vals, np.zeros(pad)]))
            grads.append(np.vstack([g, np.zeros((pad, dim))]))
    return EvalTable(
        points=np.asarray(points),
        weights=np.asarray(weights),
        element=np.asarray(owners, dtype=int),
        conn=np.asarray(conns, dtype=int),
        shape=np.asarray(shapes),
        grad=np.asarray(grads),
        n_nodes=len(mesh.nodes),
    )


def build_eval_table(
    mesh: Mesh, domain_order: int = 2, boundary_order: int = 2
) -> tuple[EvalTable, dict[str, EvalTable]]:
    """Domain table over Omega plus one boundary table per facet group."""
    domain = _table_from_elements(
        mesh, sorted(mesh.group("Omega")), domain_order, boundary=False
    )
    boundary: dict[str, EvalTable] = {}
    for name, idxs in mesh.groups.items():
        if name == "Omega" or not idxs:
            continue
        kinds = {mesh.elements[e][0] for e in idxs}
        if kinds <= set(BOUNDARY_KINDS):
            boundary[name] = _table_from_elements(
                mesh, sorted(idxs), boundary_order, boundary=True
            )
    return domain, boundary
