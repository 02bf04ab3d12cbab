"""Gmsh mesh parsing, physical-group conventions, and mesher invocation.

Supported element kinds and their Gmsh type codes: line2 (1), tri3 (2),
quad4 (3), tet4 (4). Triangles in a 3D mesh are boundary facets and are
stored as "tri3-surface". Physical group names follow the convention:
"Omega" for the domain, "Gamma_u" for the Dirichlet boundary and
"Gamma_t" for the Neumann boundary.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field

import numpy as np

VOLUME_KINDS_2D = ("tri3", "quad4")
BOUNDARY_KINDS = ("line2", "tri3-surface")

# Gmsh element type code -> (kind, node count). The kind for code 2 depends
# on the mesh dimension and is fixed up after parsing.
_GMSH_TYPES = {1: ("line2", 2), 2: ("tri3", 3), 3: ("quad4", 4), 4: ("tet4", 4)}


class MeshError(Exception):
    """Base class for mesh file errors."""


class UnsupportedVersion(MeshError):
    pass


class MissingSection(MeshError):
    pass


class MissingGroup(MeshError):
    pass


class MalformedRecord(MeshError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class WrongElementKind(MeshError):
    pass


class MesherNotFound(MeshError):
    pass


class MesherFailure(MeshError):
    """Mesher invocation failed; carries the tool's diagnostics verbatim."""

    def __init__(self, diagnostics: str):
        self.diagnostics = diagnostics
        super().__init__(diagnostics)


@dataclass
class Mesh:
    """Unstructured mesh with named element groups.

    nodes are (n, dim) coordinates; elements are (kind, node-index tuple)
    pairs with 0-based indices; groups map a name to a set of element
    indices.
    """

    dim: int
    nodes: np.ndarray
    elements: list[tuple[str, tuple[int, ...]]]
    groups: dict[str, set[int]] = field(default_factory=dict)

    def group(self, name: str) -> set[int]:
        """Element-index set for a group, empty if the group is absent."""
        return set(self.groups.get(name, set()))


@dataclass
class GeoRequest:
    """A .geo script together with meshing options."""

    geo_text: str
    characteristic_length: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if self.characteristic_length <= 0:
            raise ValueError("characteristic_length must be positive")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")


def group_lookup(mesh: Mesh, name: str) -> set[int]:
    return mesh.group(name)


def _infer_dim(elements, nodes3):
    if any(kind == "tet4" for kind, _ in elements):
        return 3
    if nodes3.shape[0] and np.max(np.abs(nodes3[:, 2])) > 1e-12:
        return 3
    return 2


class _Lines:
    """Line cursor over the file with 1-based line numbers for errors."""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos].strip()
            self.pos += 1
            if line:
                return line
        raise MissingSection("unexpected end of file")

    @property
    def line_no(self) -> int:
        return self.pos


def parse_msh(content: bytes | str) -> Mesh:
    """Parse a Gmsh ASCII .msh file (version 2.2 or 4.1) into a Mesh.

    Node indices are re-based to 0 and physical names are resolved to
    element groups. A mesh without an "Omega" group is rejected.
    """
    if isinstance(content, bytes):
        content = content.decode("utf-8", errors="replace")
    sections = _split_sections(content)
    if "MeshFormat" not in sections:
        raise MissingSection("no $MeshFormat section")
    fmt_line, fmt_body = sections["MeshFormat"]
    fields = fmt_body[0][1].split() if fmt_body else []
    if len(fields) < 2:
        raise MalformedRecord(fmt_line + 1, "bad $MeshFormat record")
    version, file_type = fields[0], fields[1]
    if file_type != "0":
        raise UnsupportedVersion("binary .msh files are not supported")
    if version not in ("2.2", "4.1"):
        raise UnsupportedVersion(f"unsupported .msh version {version}")
    for required in ("Nodes", "Elements"):
        if required not in sections:
            raise MissingSection(f"no ${required} section")

    phys_names = _parse_physical_names(sections)

    if version == "2.2":
        nodes3, node_ids = _parse_nodes_v2(sections["Nodes"])
        raw_elements = _parse_elements_v2(sections["Elements"])
    else:
        nodes3, node_ids = _parse_nodes_v4(sections["Nodes"])
        entity_phys = _parse_entities_v4(sections.get("Entities"))
        raw_elements = _parse_elements_v4(sections["Elements"], entity_phys)

    id_to_index = {nid: i for i, nid in enumerate(node_ids)}
    elements: list[tuple[str, tuple[int, ...]]] = []
    groups: dict[str, set[int]] = {}
    for line_no, kind, phys_tag, node_tags in raw_elements:
        try:
            conn = tuple(id_to_index[t] for t in node_tags)
        except KeyError as exc:
            raise MalformedRecord(line_no, f"unknown node id {exc.args[0]}")
        if len(set(conn)) != len(conn):
            raise MalformedRecord(line_no, "element has repeated node indices")
        elements.append((kind, conn))
        name = phys_names.get(phys_tag)
        if name is not None:
            groups.setdefault(name, set()).add(len(elements) - 1)

    dim = _infer_dim(elements, nodes3)
    if dim == 3:
        elements = [("tri3-surface", c) if k == "tri3" else (k, c) for k, c in elements]
    nodes = np.ascontiguousarray(nodes3[:, :dim])

    if "Omega" not in groups:
        raise MissingGroup("physical group 'Omega' is required")
    return Mesh(dim=dim, nodes=nodes, elements=elements, groups=groups)


def _split_sections(content: str):
    """Map section name to (start line index, [(line_no, line), ...])."""
    sections = {}
    current = None
    for i, raw in enumerate(content.splitlines()):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("$End"):
            current = None
        elif line.startswith("$"):
            current = line[1:]
            sections[current] = (i, [])
        elif current is not None:
            sections[current][1].append((i + 1, line))
    return sections


def _parse_physical_names(sections):
    phys = {}
    if "PhysicalNames" not in sections:
        return phys
    _, body = sections["PhysicalNames"]
    for line_no, line in body[1:]:  # first record is the count
        parts = line.split(None, 2)
        if len(parts) != 3 or not parts[2].startswith('"'):
            raise MalformedRecord(line_no, "bad $PhysicalNames record")
        phys[int(parts[1])] = parts[2].strip('"')
    return phys


def _parse_nodes_v2(section):
    _, body = section
    if not body:
        raise MissingSection("empty $Nodes section")
    count = int(body[0][1].split()[0])
    if len(body) - 1 < count:
        raise MalformedRecord(body[0][0], "truncated $Nodes section")
    coords = np.empty((count, 3))
    ids = []
    for i in range(count):
        line_no, line = body[1 + i]
        parts = line.split()
        if len(parts) != 4:
            raise MalformedRecord(line_no, "bad node record")
        try:
            ids.append(int(parts[0]))
            coords[i] = [float(v) for v in parts[1:4]]
        except ValueError:
            raise MalformedRecord(line_no, "bad node record") from None
    return coords, ids


def _parse_elements_v2(section):
    _, body = section
    if not body:
        raise MissingSection("empty $Elements section")
    count = int(body[0][1].split()[0])
    out = []
    for i in range(count):
        line_no, line = body[1 + i]
        parts = line.split()
        if len(parts) < 3:
            raise MalformedRecord(line_no, "bad element record")
        try:
            etype = int(parts[1])
            n_tags = int(parts[2])
            tags = [int(v) for v in parts[3 : 3 + n_tags]]
            node_tags = [int(v) for v in parts[3 + n_tags :]]
        except ValueError:
            raise MalformedRecord(line_no, "bad element record") from None
        if etype not in _GMSH_TYPES:
            raise MalformedRecord(line_no, f"unsupported element type {etype}")
        kind, n_nodes = _GMSH_TYPES[etype]
        if len(node_tags) != n_nodes:
            raise MalformedRecord(line_no, f"expected {n_nodes} nodes for {kind}")
        phys = tags[0] if tags else None
        out.append((line_no, kind, phys, node_tags))
    return out


def _parse_entities_v4(section):
    """Entity (dim, tag) -> physical tag, from a v4.1 $Entities section."""
    mapping = {}
    if section is None:
        return mapping
    _, body = section
    tokens = []
    for _, line in body:
        tokens.extend(line.split())
    it = iter(tokens)
    counts = [int(next(it)) for _ in range(4)]
    for d, n in enumerate(counts):
        for _ in range(n):
            tag = int(next(it))
            n_coords = 3 if d == 0 else 6
            for _ in range(n_coords):
                next(it)
            n_phys = int(next(it))
            phys = [int(next(it)) for _ in range(n_phys)]
            if phys:
                mapping[(d, tag)] = phys[0]
            if d > 0:
                n_bnd = int(next(it))
                for _ in range(n_bnd):
                    next(it)
    return mapping


def _parse_nodes_v4(section):
    start, body = section
    tokens = []
    for _, line in body:
        tokens.extend(line.split())
    it = iter(tokens)
    try:
        n_blocks = int(next(it))
        next(it), next(it), next(it)  # numNodes, minTag, maxTag
        ids, coords = [], []
        for _ in range(n_blocks):
            next(it), next(it)  # entityDim, entityTag
            parametric = int(next(it))
            n = int(next(it))
            block_ids = [int(next(it)) for _ in range(n)]
            for bid in block_ids:
                x = float(next(it))
                y = float(next(it))
                z = float(next(it))
                if parametric:
                    raise MalformedRecord(start + 1, "parametric nodes unsupported")
                ids.append(bid)
                coords.append((x, y, z))
    except StopIteration:
        raise MalformedRecord(start + 1, "truncated $Nodes section")
    return np.asarray(coords, dtype=float).reshape(-1, 3), ids


def _parse_elements_v4(section, entity_phys):
    start, body = section
    tokens = []
    for _, line in body:
        tokens.extend(line.split())
    it = iter(tokens)
    out = []
    try:
        n_blocks = int(next(it))
        next(it), next(it), next(it)
        for _ in range(n_blocks):
            ent_dim = int(next(it))
            ent_tag = int(next(it))
            etype = int(next(it))
            n = int(next(it))
            if etype not in _GMSH_TYPES:
                raise MalformedRecord(start + 1, f"unsupported element type {etype}")
            kind, n_nodes = _GMSH_TYPES[etype]
            phys = entity_phys.get((ent_dim, ent_tag))
            for _ in range(n):
                next(it)  # element tag
                node_tags = [int(next(it)) for _ in range(n_nodes)]
                out.append((start + 1, kind, phys, node_tags))
    except StopIteration:
        raise MalformedRecord(start + 1, "truncated $Elements section")
    return out


def write_msh(mesh: Mesh, path: str | os.PathLike | None = None) -> str:
    """Serialize a Mesh as Gmsh ASCII v2.2; returns the text."""
    kind_to_type = {"line2": 1, "tri3": 2, "tri3-surface": 2, "quad4": 3, "tet4": 4}
    group_names = sorted(mesh.groups)
    name_to_tag = {name: i + 1 for i, name in enumerate(group_names)}
    elem_phys = {}
    for name, idxs in mesh.groups.items():
        for e in idxs:
            elem_phys[e] = name_to_tag[name]

    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    if group_names:
        out.append("$PhysicalNames")
        out.append(str(len(group_names)))
        kind_dim = {"line2": 1, "tri3": 2, "quad4": 2, "tri3-surface": 2, "tet4": 3}
        for name in group_names:
            any_elem = next(iter(mesh.groups[name]))
            gdim = kind_dim[mesh.elements[any_elem][0]]
            out.append(f'{gdim} {name_to_tag[name]} "{name}"')
        out.append("$EndPhysicalNames")
    out.append("$Nodes")
    out.append(str(len(mesh.nodes)))
    for i, xyz in enumerate(mesh.nodes):
        coords = list(xyz) + [0.0] * (3 - mesh.dim)
        out.append(f"{i + 1} " + " ".join(f"{v:.17g}" for v in coords))
    out.append("$EndNodes")
    out.append("$Elements")
    out.append(str(len(mesh.elements)))
    for i, (kind, conn) in enumerate(mesh.elements):
        phys = elem_phys.get(i, 0)
        nodes = " ".join(str(c + 1) for c in conn)
        out.append(f"{i + 1} {kind_to_type[kind]} 2 {phys} {phys} {nodes}")
    out.append("$EndElements")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def boundary_facets(mesh: Mesh, group: str) -> list[np.ndarray]:
    """Vertex coordinates for each boundary element in a group.

    Returns (2, dim) segment arrays in 2D and (3, 3) triangle arrays in
    3D, in element order.
    """
    facets = []
    for e in sorted(mesh.group(group)):
        kind, conn = mesh.elements[e]
        if kind not in BOUNDARY_KINDS:
            raise WrongElementKind(
                f"element {e} of kind {kind} is not a boundary element"
            )
        facets.append(mesh.nodes[list(conn)].copy())
    return facets


class GmshMesher:
    """Handle for the external gmsh executable.

    The executable path comes from LMDEM_GMSH_BIN (default "gmsh").
    """

    def __init__(self, executable: str | None = None):
        self.executable = executable or os.environ.get("LMDEM_GMSH_BIN", "gmsh")

    def run(self, geo_path: str, dim: int, clscale: float, out_path: str) -> tuple[int, str]:
        cmd = [
            self.executable,
            f"-{dim}",
            "-clscale",
            str(clscale),
            "-format",
            "msh2",
            "-o",
            out_path,
            geo_path,
        ]
        if shutil.which(self.executable) is None:
            raise MesherNotFound(f"mesher executable not found: {self.executable}")
        proc = subprocess.run(cmd, capture_output=True, text=True)
        return proc.returncode, proc.stdout + proc.stderr


def mesh_from_geo(req: GeoRequest, mesher=None) -> Mesh:
    """Mesh a .geo script with the external mesher and parse the result.

    The temp directory is removed on success and retained on failure so
    the inputs of a failed run can be inspected.
    """
    if mesher is None:
        mesher = GmshMesher()
    workdir = tempfile.mkdtemp(prefix="lmdem-geo-")
    geo_path = os.path.join(workdir, "model.geo")
    out_path = os.path.join(workdir, "model.msh")
    with open(geo_path, "w") as fh:
        fh.write(req.geo_text)
    rc, output = mesher.run(geo_path, req.dim, req.characteristic_length, out_path)
    if rc != 0 or not os.path.exists(out_path):
        raise MesherFailure(output)
    with open(out_path, "rb") as fh:
        mesh = parse_msh(fh.read())
    shutil.rmtree(workdir, ignore_errors=True)
    return mesh
