"""Shared fixtures: structured meshes and fake meshers.

The structured generators below exist only for tests; the library itself
never generates meshes (that is gmsh's job).
"""

from __future__ import annotations

import numpy as np
import pytest

from lmdem.mesh import Mesh


def unit_square_tri(n: int = 4, groups: str = "three-fixed") -> Mesh:
    """Structured crossed-triangle mesh of the unit square.

    groups:
      "three-fixed": Gamma_u = left+bottom+top edges, Gamma_t = right edge
      "all-fixed":   Gamma_u = all four edges, no Gamma_t
      "left-fixed":  Gamma_u = left edge, Gamma_t = right edge
    """
    xs = np.linspace(0.0, 1.0, n + 1)
    nodes = np.array([[x, y] for y in xs for x in xs])

    def nid(i, j):
        return j * (n + 1) + i

    elements = []
    domain = set()
    for j in range(n):
        for i in range(n):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            elements.append(("tri3", (a, b, c)))
            domain.add(len(elements) - 1)
            elements.append(("tri3", (a, c, d)))
            domain.add(len(elements) - 1)

    left, right, bottom, top = set(), set(), set(), set()
    for k in range(n):
        elements.append(("line2", (nid(0, k), nid(0, k + 1))))
        left.add(len(elements) - 1)
        elements.append(("line2", (nid(n, k), nid(n, k + 1))))
        right.add(len(elements) - 1)
        elements.append(("line2", (nid(k, 0), nid(k + 1, 0))))
        bottom.add(len(elements) - 1)
        elements.append(("line2", (nid(k, n), nid(k + 1, n))))
        top.add(len(elements) - 1)

    if groups == "three-fixed":
        gdict = {"Omega": domain, "Gamma_u": left | bottom | top, "Gamma_t": right}
    elif groups == "all-fixed":
        gdict = {"Omega": domain, "Gamma_u": left | right | bottom | top}
    elif groups == "left-fixed":
        gdict = {"Omega": domain, "Gamma_u": left, "Gamma_t": right}
    else:
        raise ValueError(groups)
    return Mesh(dim=2, nodes=nodes, elements=elements, groups=gdict)


def unit_square_quad(n: int = 4) -> Mesh:
    """Structured quad mesh, Gamma_u = left edge, Gamma_t = right edge."""
    xs = np.linspace(0.0, 1.0, n + 1)
    nodes = np.array([[x, y] for y in xs for x in xs])

    def nid(i, j):
        return j * (n + 1) + i

    elements = []
    domain = set()
    for j in range(n):
        for i in range(n):
            elements.append(
                ("quad4", (nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)))
            )
            domain.add(len(elements) - 1)
    left, right = set(), set()
    for k in range(n):
        elements.append(("line2", (nid(0, k), nid(0, k + 1))))
        left.add(len(elements) - 1)
        elements.append(("line2", (nid(n, k), nid(n, k + 1))))
        right.add(len(elements) - 1)
    return Mesh(
        dim=2,
        nodes=nodes,
        elements=elements,
        groups={"Omega": domain, "Gamma_u": left, "Gamma_t": right},
    )


def _cube_tets(corners):
    """Split one hexahedron (8 corner node ids, vtk ordering) into 6 tets."""
    c = corners
    return [
        (c[0], c[1], c[3], c[7]),
        (c[0], c[1], c[7], c[5]),
        (c[0], c[5], c[7], c[4]),
        (c[1], c[2], c[3], c[7]),
        (c[1], c[2], c[7], c[6]),
        (c[1], c[6], c[7], c[5]),
    ]


def unit_cube_tet(n: int = 3, hole: bool = False) -> Mesh:
    """Structured tet mesh of the unit cube; Gamma_u = face x=0,
    Gamma_t = face x=1. With hole=True the central cells are removed
    (a staircase hole), giving the plate-with-hole fixture."""
    xs = np.linspace(0.0, 1.0, n + 1)
    nodes = np.array([[x, y, z] for z in xs for y in xs for x in xs])

    def nid(i, j, k):
        return (k * (n + 1) + j) * (n + 1) + i

    elements = []
    domain = set()
    lo, hi = n // 3, n - n // 3  # cells removed when hole=True
    for k in range(n):
        for j in range(n):
            for i in range(n):
                if hole and lo <= i < hi and lo <= j < hi and lo <= k < hi:
                    continue
                corners = [
                    nid(i, j, k),
                    nid(i + 1, j, k),
                    nid(i + 1, j + 1, k),
                    nid(i, j + 1, k),
                    nid(i, j, k + 1),
                    nid(i + 1, j, k + 1),
                    nid(i + 1, j + 1, k + 1),
                    nid(i, j + 1, k + 1),
                ]
                for conn in _cube_tets(corners):
                    elements.append(("tet4", conn))
                    domain.add(len(elements) - 1)

    def face_tris(plane_i):
        tris = set()
        for k in range(n):
            for j in range(n):
                a = nid(plane_i, j, k)
                b = nid(plane_i, j + 1, k)
                c = nid(plane_i, j + 1, k + 1)
                d = nid(plane_i, j, k + 1)
                elements.append(("tri3-surface", (a, b, c)))
                tris.add(len(elements) - 1)
                elements.append(("tri3-surface", (a, c, d)))
                tris.add(len(elements) - 1)
        return tris

    gamma_u = face_tris(0)
    gamma_t = face_tris(n)
    used = sorted({i for _, conn in elements for i in conn})
    remap = {old: new for new, old in enumerate(used)}
    nodes = nodes[used]
    elements = [(kind, tuple(remap[i] for i in conn)) for kind, conn in elements]
    return Mesh(
        dim=3,
        nodes=nodes,
        elements=elements,
        groups={"Omega": domain, "Gamma_u": gamma_u, "Gamma_t": gamma_t},
    )


class FakeMesher:
    """Mesher handle producing canned .msh bytes, or failing with a
    canned diagnostic. Each response is either bytes (success) or a
    string (failure diagnostic); the last response repeats."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def run(self, geo_path, dim, clscale, out_path):
        with open(geo_path) as fh:
            self.calls.append(fh.read())
        item = self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        if isinstance(item, str):
            return 1, item
        with open(out_path, "wb") as fh:
            fh.write(item)
        return 0, "done"


@pytest.fixture
def square_mesh():
    return unit_square_tri(4)


@pytest.fixture
def quad_mesh():
    return unit_square_quad(4)


@pytest.fixture
def cube_mesh():
    return unit_cube_tet(2)
