"""Small structured meshes used by the demo scripts.

Real problems come from .msh files (see lmdem.mesh.parse_msh or the
`lmdem mesh` command, which drives gmsh). For self-contained demos we
build the unit square by hand: a regular grid of nodes, each cell split
into two triangles, plus line elements on the edges so the boundary
groups Gamma_u (prescribed displacement) and Gamma_t (applied traction)
have something to point at.
"""

import numpy as np

from lmdem.mesh import Mesh


def unit_square(n: int = 10, fixed: str = "left") -> Mesh:
    """Right-triangle mesh of [0,1]^2 with n cells per side.

    fixed = "left"  -> Gamma_u is the left edge, Gamma_t the right one
    fixed = "all"   -> Gamma_u is the whole boundary (no traction group)
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

    edges = {"left": set(), "right": set(), "bottom": set(), "top": set()}
    for k in range(n):
        for name, conn in [
            ("left", (nid(0, k), nid(0, k + 1))),
            ("right", (nid(n, k), nid(n, k + 1))),
            ("bottom", (nid(k, 0), nid(k + 1, 0))),
            ("top", (nid(k, n), nid(k + 1, n))),
        ]:
            elements.append(("line2", conn))
            edges[name].add(len(elements) - 1)

    if fixed == "left":
        groups = {"Omega": domain, "Gamma_u": edges["left"], "Gamma_t": edges["right"]}
    elif fixed == "all":
        groups = {"Omega": domain, "Gamma_u": set().union(*edges.values())}
    else:
        raise ValueError(fixed)
    return Mesh(dim=2, nodes=nodes, elements=elements, groups=groups)
