"""Meshes of simplices and polygons with face topology and sub-triangulations.

A mesh stores vertices and element connectivity only.  Everything derived
(face adjacency, normals, barycenters, sub-simplices) is computed by
:func:`build_topology` and :func:`element_geometry`.  All constructors fix
simplex orientation so signed volumes are positive, and polygon cells must
be star-shaped with respect to their centroid so the fan sub-triangulation
is valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadCount,
    DanglingNode,
    DegenerateElement,
    MixedDimension,
    NonCCW,
    NonManifold,
    NotStarShaped,
    UnsupportedVersion,
)


@dataclass
class Mesh:
    """A conforming partition into simplices or (2D) polygons.

    ``vertices`` is an (nv, dim) float array, ``elements`` a list of vertex
    index tuples.  Simplex elements have dim+1 vertices; polygon elements
    (2D only) are counter-clockwise vertex loops of any length >= 3.
    """

    dim: int
    vertices: np.ndarray
    elements: list
    element_kind: str = "simplex"

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.elements = [tuple(int(i) for i in el) for el in self.elements]

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_elements(self):
        return len(self.elements)

    def element_coords(self, K):
        return self.vertices[list(self.elements[K])]

    def validate(self):
        """Check index bounds, orientation and element uniqueness."""
        nv = self.num_vertices
        seen = set()
        for K, el in enumerate(self.elements):
            if any(i < 0 or i >= nv for i in el):
                raise ValueError(f"element {K} references a vertex out of range")
            key = frozenset(el)
            if key in seen:
                raise ValueError(f"element {K} duplicates another element's vertex set")
            seen.add(key)
            if self.element_kind == "simplex":
                if len(el) != self.dim + 1:
                    raise ValueError(f"element {K} is not a {self.dim}-simplex")
                if simplex_volume(self.vertices[list(el)]) <= 0.0:
                    raise ValueError(f"element {K} has non-positive volume")
        return self


@dataclass
class FaceTopology:
    """Deduplicated (dim-1)-facets with two-sided element adjacency.

    ``sides[f] = (K_plus, K_minus)`` with ``K_minus = -1`` on the boundary;
    the plus side is always the lower element id.  ``normals[f]`` is the
    unit outward normal of the plus side; the minus side sees its negation.
    """

    faces: list
    sides: np.ndarray
    normals: np.ndarray
    h_e: np.ndarray
    boundary: np.ndarray
    neighbors: list = field(repr=False)

    @property
    def num_faces(self):
        return len(self.faces)

    @property
    def interior(self):
        return ~self.boundary

    def interior_faces(self):
        return np.nonzero(~self.boundary)[0]

    def boundary_faces(self):
        return np.nonzero(self.boundary)[0]


@dataclass
class ElementGeometry:
    """Barycenter, diameter, measure and simplex tiling of one element."""

    barycenter: np.ndarray
    diameter: float
    measure: float
    sub_simplices: np.ndarray  # (ns, dim+1, dim) vertex coordinates


# --------------------------------------------------------------------------
# primitive geometry helpers
# --------------------------------------------------------------------------

def simplex_volume(coords):
    """Signed measure of a simplex given its (dim+1, dim) vertex array."""
    coords = np.asarray(coords, dtype=float)
    d = coords.shape[1]
    J = coords[1:] - coords[0]
    return float(np.linalg.det(J)) / math.factorial(d)


def _orient_simplex(el, vertices):
    if simplex_volume(vertices[list(el)]) < 0.0:
        el = el[:-2] + (el[-1], el[-2])
    return el


def _diameter(coords):
    coords = np.asarray(coords, dtype=float)
    diff = coords[:, None, :] - coords[None, :, :]
    return float(np.sqrt((diff ** 2).sum(-1)).max())


def _polygon_area(coords):
    x, y = coords[:, 0], coords[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _polygon_centroid(coords):
    x, y = coords[:, 0], coords[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * cross.sum()
    cx = ((x + np.roll(x, -1)) * cross).sum() / (6.0 * area)
    cy = ((y + np.roll(y, -1)) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


# --------------------------------------------------------------------------
# structured generators
# --------------------------------------------------------------------------

def generate_square_tri(n, side=math.pi):
    """Uniform n x n grid on [0, side]^2, each cell split into two triangles.

    Cell diagonals alternate in a herringbone pattern; a single global
    diagonal direction correlates with the patch stencils and visibly
    degrades reconstruction quality on this mesh family.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if side <= 0:
        raise ValueError("side must be positive")
    xs = np.linspace(0.0, side, n + 1)
    verts = np.array([[xs[i], xs[j]] for j in range(n + 1) for i in range(n + 1)])

    def vid(i, j):
        return j * (n + 1) + i

    elements = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                elements.append((v00, v10, v11))
                elements.append((v00, v11, v01))
            else:
                elements.append((v00, v10, v01))
                elements.append((v10, v11, v01))
    return Mesh(2, verts, elements).validate()


_KUHN_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def generate_cube_tet(n):
    """Unit cube split into n^3 cells of 6 tetrahedra each (Kuhn split).

    The Kuhn split is face-to-face compatible across cells because every
    shared cube face receives the same diagonal from the global axis order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    verts = np.array(
        [[xs[i], xs[j], xs[k]] for k in range(n + 1) for j in range(n + 1) for i in range(n + 1)]
    )

    def vid(i, j, k):
        return (k * (n + 1) + j) * (n + 1) + i

    elements = []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                base = np.array([i, j, k])
                for perm in _KUHN_PERMS:
                    # walk from the low corner to the high corner along perm
                    path = [base.copy()]
                    for axis in perm:
                        nxt = path[-1].copy()
                        nxt[axis] += 1
                        path.append(nxt)
                    el = tuple(vid(*p) for p in path)
                    elements.append(_orient_simplex(el, verts))
    return Mesh(3, verts, elements).validate()


# --------------------------------------------------------------------------
# MSH 2.2 reader / writer (ASCII, element types 2 and 4 only)
# --------------------------------------------------------------------------

def parse_msh(text):
    """Parse an ASCII Gmsh MSH 2.2 file into a Mesh.

    Triangles (type 2) or tetrahedra (type 4) are imported; points and lines
    are skipped.  Node ids are remapped to dense 0-based indices in file
    order.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = [ln.strip() for ln in text.splitlines()]
    sections = {}
    i = 0
    while i < len(lines):
        ln = lines[i]
        if ln.startswith("$") and not ln.startswith("$End"):
            name = ln[1:]
            j = i + 1
            body = []
            while j < len(lines) and lines[j] != f"$End{name}":
                body.append(lines[j])
                j += 1
            if j == len(lines):
                raise BadCount(f"section {name} is not terminated")
            sections[name] = body
            i = j + 1
        else:
            i += 1

    if "MeshFormat" not in sections or not sections["MeshFormat"]:
        raise UnsupportedVersion("missing $MeshFormat header")
    version = sections["MeshFormat"][0].split()[0]
    if version != "2.2":
        raise UnsupportedVersion(f"MSH version {version} is not supported (need 2.2)")
    if "Nodes" not in sections or "Elements" not in sections:
        raise BadCount("missing $Nodes or $Elements section")

    node_lines = sections["Nodes"]
    n_nodes = int(node_lines[0])
    if len(node_lines) - 1 != n_nodes:
        raise BadCount("node count disagrees with $Nodes body")
    id_map = {}
    coords = []
    for ln in node_lines[1:]:
        parts = ln.split()
        nid = int(parts[0])
        id_map[nid] = len(coords)
        coords.append([float(p) for p in parts[1:4]])
    coords = np.array(coords)

    elem_lines = sections["Elements"]
    n_elems = int(elem_lines[0])
    if len(elem_lines) - 1 != n_elems:
        raise BadCount("element count disagrees with $Elements body")
    tris, tets = [], []
    for ln in elem_lines[1:]:
        parts = [int(p) for p in ln.split()]
        etype, ntags = parts[1], parts[2]
        nodes = parts[3 + ntags:]
        if etype == 2:
            tris.append(nodes)
        elif etype == 4:
            tets.append(nodes)
        # everything else (points, lines, ...) is ignored
    if tris and tets:
        raise MixedDimension("file contains both triangles and tetrahedra")
    if not tris and not tets:
        raise BadCount("no triangles or tetrahedra in file")

    raw = tris if tris else tets
    dim = 2 if tris else 3
    elements = []
    for nodes in raw:
        try:
            el = tuple(id_map[n] for n in nodes)
        except KeyError as missing:
            raise DanglingNode(f"element references missing node {missing}") from None
        elements.append(el)
    verts = coords[:, :dim]
    elements = [_orient_simplex(el, verts) for el in elements]
    return Mesh(dim, verts, elements).validate()


def write_msh(mesh):
    """Serialize a simplex Mesh to an ASCII MSH 2.2 string."""
    if mesh.element_kind != "simplex":
        raise ValueError("MSH export supports simplex meshes only")
    etype = 2 if mesh.dim == 2 else 4
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.num_vertices)]
    for i, v in enumerate(mesh.vertices):
        xyz = list(v) + [0.0] * (3 - mesh.dim)
        out.append(f"{i + 1} " + " ".join("%.17g" % c for c in xyz))
    out += ["$EndNodes", "$Elements", str(mesh.num_elements)]
    for K, el in enumerate(mesh.elements):
        nodes = " ".join(str(i + 1) for i in el)
        out.append(f"{K + 1} {etype} 2 0 1 {nodes}")
    out.append("$EndElements")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# polygon mesh text format
# --------------------------------------------------------------------------

def parse_poly(text):
    """Parse the line-oriented polygon format: "V E", V vertex lines "x y",
    then E element lines "k i1 ... ik" with counter-clockwise loops."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise BadCount("expected a counts line 'V E'")
    nv, ne = int(rows[0][0]), int(rows[0][1])
    if len(rows) != 1 + nv + ne:
        raise BadCount(f"expected {1 + nv + ne} lines, found {len(rows)}")
    verts = np.array([[float(r[0]), float(r[1])] for r in rows[1:1 + nv]])
    elements = []
    for r in rows[1 + nv:]:
        k = int(r[0])
        if len(r) != 1 + k:
            raise BadCount("polygon line length disagrees with its vertex count")
        if k < 3:
            raise BadCount("polygon needs at least 3 vertices")
        el = tuple(int(i) for i in r[1:])
        if any(i < 0 or i >= nv for i in el):
            raise DanglingNode("polygon references a vertex out of range")
        if _polygon_area(verts[list(el)]) <= 0.0:
            raise NonCCW("polygon has non-positive (clockwise) area")
        elements.append(el)
    mesh = Mesh(2, verts, elements, element_kind="polygon").validate()
    for K in range(mesh.num_elements):
        element_geometry(mesh, K)  # raises NotStarShaped / DegenerateElement
    return mesh


def write_poly(mesh):
    """Serialize a 2D polygon (or triangle) mesh in the parse_poly format."""
    if mesh.dim != 2:
        raise ValueError("poly export is 2D only")
    out = [f"{mesh.num_vertices} {mesh.num_elements}"]
    for v in mesh.vertices:
        out.append("%.17g %.17g" % (v[0], v[1]))
    for el in mesh.elements:
        out.append(f"{len(el)} " + " ".join(str(i) for i in el))
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# topology and per-element geometry
# --------------------------------------------------------------------------

def _element_facets(el, dim, kind):
    if kind == "polygon":
        return [(el[i], el[(i + 1) % len(el)]) for i in range(len(el))]
    if dim == 2:
        a, b, c = el
        return [(a, b), (b, c), (c, a)]
    a, b, c, d = el
    return [(b, c, d), (a, c, d), (a, b, d), (a, b, c)]


def build_topology(mesh):
    """Deduplicate facets and attach two-sided adjacency and outward normals."""
    facet_map = {}
    for K, el in enumerate(mesh.elements):
        for facet in _element_facets(el, mesh.dim, mesh.element_kind):
            key = tuple(sorted(facet))
            facet_map.setdefault(key, []).append(K)

    barys = np.array([element_geometry(mesh, K).barycenter for K in range(mesh.num_elements)])

    faces, sides, normals, h_e, boundary = [], [], [], [], []
    for key in sorted(facet_map):
        incident = facet_map[key]
        if len(incident) > 2:
            raise NonManifold(f"facet {key} is shared by {len(incident)} elements")
        kp = min(incident)
        km = max(incident) if len(incident) == 2 else -1
        coords = mesh.vertices[list(key)]
        if mesh.dim == 2:
            t = coords[1] - coords[0]
            n = np.array([t[1], -t[0]])
        else:
            n = np.cross(coords[1] - coords[0], coords[2] - coords[0])
        n = n / np.linalg.norm(n)
        center = coords.mean(axis=0)
        if np.dot(n, center - barys[kp]) < 0.0:
            n = -n
        faces.append(key)
        sides.append((kp, km))
        normals.append(n)
        h_e.append(_diameter(coords))
        boundary.append(km == -1)

    sides = np.array(sides, dtype=int)
    boundary = np.array(boundary, dtype=bool)
    neighbors = [[] for _ in range(mesh.num_elements)]
    for (kp, km), b in zip(sides, boundary):
        if not b:
            neighbors[kp].append(int(km))
            neighbors[km].append(int(kp))
    neighbors = [sorted(ns) for ns in neighbors]
    return FaceTopology(faces, sides, np.array(normals), np.array(h_e), boundary, neighbors)


def element_geometry(mesh, K):
    """Barycenter, diameter, measure and a simplex tiling of element K.

    Simplices tile themselves; polygons are fanned from their area centroid,
    which requires (and checks) star-shapedness with respect to it.
    """
    coords = mesh.element_coords(K)
    h = _diameter(coords)
    if mesh.element_kind == "simplex":
        vol = simplex_volume(coords)
        if vol <= 1e-14 * h ** mesh.dim:
            raise DegenerateElement(f"element {K} has measure {vol:g}")
        bary = coords.mean(axis=0)
        subs = coords[None, :, :]
        return ElementGeometry(bary, h, vol, subs)

    area = _polygon_area(coords)
    if area <= 1e-14 * h ** 2:
        raise DegenerateElement(f"polygon {K} has area {area:g}")
    centroid = _polygon_centroid(coords)
    k = len(coords)
    subs = np.empty((k, 3, 2))
    for i in range(k):
        subs[i, 0] = centroid
        subs[i, 1] = coords[i]
        subs[i, 2] = coords[(i + 1) % k]
        if simplex_volume(subs[i]) <= 1e-14 * h ** 2:
            raise NotStarShaped(f"polygon {K} is not star-shaped about its centroid")
    return ElementGeometry(centroid, h, area, subs)


def all_geometries(mesh):
    return [element_geometry(mesh, K) for K in range(mesh.num_elements)]


def mesh_size(mesh):
    """max_K h_K."""
    return max(g.diameter for g in all_geometries(mesh))
