"""Immutable 2D simplicial complexes (vertices, edges, triangles).

Simplex ids are stable: vertices keep their input order, edges are numbered
in lexicographic order of their sorted vertex pairs and triangles keep the
order in which they were given (with their vertex triple sorted).
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DanglingVertexIndex,
    DegenerateTriangle,
    DuplicateTriangle,
    InvalidDimensions,
    NonManifoldEdge,
    NoSuchEdge,
)


class SimplexRef(NamedTuple):
    """Dimension-tagged simplex handle; tuple order gives the (dim, id) total order."""

    dim: int
    id: int

    def __repr__(self) -> str:
        return f"{'VET'[self.dim]}{self.id}"


def vertex(i: int) -> SimplexRef:
    return SimplexRef(0, int(i))


def edge(i: int) -> SimplexRef:
    return SimplexRef(1, int(i))


def triangle(i: int) -> SimplexRef:
    return SimplexRef(2, int(i))


def _csr(owner: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Group item indices by owner id, stable in item order."""
    order = np.argsort(owner, kind="stable")
    counts = np.bincount(owner, minlength=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, order.astype(np.int64)


class TriMesh2:
    """A 2-manifold triangulation (with boundary) embedded in the plane.

    Use :func:`build_from_arrays` or :func:`grid_triangulation` to construct
    one; the constructor assumes already-validated arrays.

    Attributes
    ----------
    coords : ndarray, shape (V, 2)
    edges : ndarray, shape (E, 2)
        Vertex pairs, ascending within each row and lexicographically sorted.
    triangles : ndarray, shape (T, 3)
        Vertex triples, ascending within each row.
    tri_edges : ndarray, shape (T, 3)
        Edge ids of each triangle ``(a,b), (a,c), (b,c)`` for triple ``a<b<c``.
    edge_tris : ndarray, shape (E, 2)
        Incident triangle ids, ``-1`` in the second slot for boundary edges.
    boundary_edge, boundary_vertex : ndarray of bool
    """

    def __init__(self, coords, edges, triangles, tri_edges, edge_tris):
        self.coords = coords
        self.edges = edges
        self.triangles = triangles
        self.tri_edges = tri_edges
        self.edge_tris = edge_tris
        for arr in (coords, edges, triangles, tri_edges, edge_tris):
            arr.setflags(write=False)

        nv = len(coords)
        self.boundary_edge = edge_tris[:, 1] < 0
        self.boundary_vertex = np.zeros(nv, dtype=bool)
        self.boundary_vertex[edges[self.boundary_edge].ravel()] = True
        self.boundary_edge.setflags(write=False)
        self.boundary_vertex.setflags(write=False)

        # vertex -> incident edges / triangles, CSR
        ev = edges.ravel()
        self._ve_off, idx = _csr(ev, nv)
        self._ve = idx // 2
        tv = triangles.ravel()
        self._vt_off, idx = _csr(tv, nv)
        self._vt = idx // 3
        self._edge_key = edges[:, 0].astype(np.int64) * nv + edges[:, 1]

    # -- sizes -------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def count(self, dim: int) -> int:
        return (self.n_vertices, self.n_edges, self.n_triangles)[dim]

    @property
    def n_simplices(self) -> int:
        return self.n_vertices + self.n_edges + self.n_triangles

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    # -- incidence ---------------------------------------------------------
    def vertex_edges(self, v: int) -> np.ndarray:
        return self._ve[self._ve_off[v]:self._ve_off[v + 1]]

    def vertex_triangles(self, v: int) -> np.ndarray:
        return self._vt[self._vt_off[v]:self._vt_off[v + 1]]

    def edge_triangles(self, e: int) -> list[int]:
        a, b = self.edge_tris[e]
        return [int(a)] if b < 0 else [int(a), int(b)]

    def edge_id(self, a: int, b: int) -> int:
        """Id of the edge joining vertices ``a`` and ``b``."""
        if a > b:
            a, b = b, a
        key = int(a) * self.n_vertices + int(b)
        i = int(np.searchsorted(self._edge_key, key))
        if i == len(self._edge_key) or self._edge_key[i] != key:
            raise NoSuchEdge(f"no edge between vertices {a} and {b}")
        return i

    def other_vertex(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return int(b) if a == v else int(a)

    def vertices_of(self, s: SimplexRef) -> tuple[int, ...]:
        if s.dim == 0:
            return (s.id,)
        if s.dim == 1:
            return tuple(int(v) for v in self.edges[s.id])
        return tuple(int(v) for v in self.triangles[s.id])

    def is_valid(self, s: SimplexRef) -> bool:
        return s.dim in (0, 1, 2) and 0 <= s.id < self.count(s.dim)

    def is_face(self, alpha: SimplexRef, beta: SimplexRef) -> bool:
        """True when ``alpha`` is a proper face of ``beta`` of codimension one."""
        if beta.dim != alpha.dim + 1:
            return False
        return set(self.vertices_of(alpha)) <= set(self.vertices_of(beta))

    def __repr__(self) -> str:
        return (f"TriMesh2(V={self.n_vertices}, E={self.n_edges}, "
                f"T={self.n_triangles})")


def build_from_arrays(coords, triangle_index_triples) -> TriMesh2:
    """Build a mesh from vertex coordinates and triangle index triples.

    Raises
    ------
    DanglingVertexIndex
        A triple references a vertex id outside ``[0, V)``.
    DegenerateTriangle
        A triple repeats a vertex.
    DuplicateTriangle
        The same vertex triple occurs twice.
    NonManifoldEdge
        An edge is shared by more than two triangles.
    """
    coords = np.array(coords, dtype=np.float64, copy=True)
    if coords.ndim != 2 or coords.shape[1] not in (2, 3):
        raise InvalidDimensions("coords must have shape (V, 2)")
    coords = np.ascontiguousarray(coords[:, :2])
    tris = np.array(triangle_index_triples, dtype=np.int64).reshape(-1, 3)
    nv = len(coords)
    if tris.size and (tris.min() < 0 or tris.max() >= nv):
        bad = int(np.flatnonzero(((tris < 0) | (tris >= nv)).any(axis=1))[0])
        raise DanglingVertexIndex(f"triangle {bad} references a missing vertex")
    tris = np.sort(tris, axis=1)
    degenerate = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2])
    if degenerate.any():
        raise DegenerateTriangle(f"triangle {int(np.flatnonzero(degenerate)[0])} repeats a vertex")
    if len(tris):
        _, first, counts = np.unique(tris, axis=0, return_index=True, return_counts=True)
        if (counts > 1).any():
            raise DuplicateTriangle("duplicate triangle in input")

    nt = len(tris)
    # local edge slots (a,b), (a,c), (b,c)
    half = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
    if nt:
        edges, inverse = np.unique(half, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
        inverse = np.zeros(0, dtype=np.int64)
    tri_edges = inverse.reshape(3, nt).T.copy()
    ne = len(edges)
    counts = np.bincount(inverse, minlength=ne)
    if (counts > 2).any():
        e = int(np.flatnonzero(counts > 2)[0])
        raise NonManifoldEdge(f"edge {tuple(edges[e])} has {counts[e]} triangles")

    owner_tri = np.tile(np.arange(nt, dtype=np.int64), 3)
    order = np.argsort(inverse, kind="stable")
    edge_tris = np.full((ne, 2), -1, dtype=np.int64)
    starts = np.zeros(ne + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    sorted_tris = owner_tri[order]
    edge_tris[:, 0] = sorted_tris[starts[:-1]] if ne else edge_tris[:, 0]
    two = counts == 2
    edge_tris[two, 1] = sorted_tris[starts[:-1][two] + 1]
    return TriMesh2(coords, edges.astype(np.int64), tris, tri_edges, edge_tris)


def grid_triangulation(nx: int, ny: int, origin=(0.0, 0.0), spacing=1.0,
                       diagonal_rule: str = "/") -> TriMesh2:
    """Regular ``nx`` by ``ny`` vertex grid, each cell split by one diagonal.

    Vertex ids are row-major (``id = j * nx + i`` with ``i`` along x).
    ``diagonal_rule`` is ``"/"`` (lower-left to upper-right, the default),
    ``"\\"`` (lower-right to upper-left) or ``"alternate"`` (checkerboard).
    """
    if nx < 2 or ny < 2:
        raise InvalidDimensions(f"grid needs nx, ny >= 2 (got {nx}x{ny})")
    sx, sy = (spacing, spacing) if np.isscalar(spacing) else spacing
    if sx <= 0 or sy <= 0:
        raise InvalidDimensions("spacing must be positive")
    if diagonal_rule not in ("/", "\\", "alternate"):
        raise InvalidDimensions(f"unknown diagonal rule {diagonal_rule!r}")
    xs = origin[0] + sx * np.arange(nx, dtype=np.float64)
    ys = origin[1] + sy * np.arange(ny, dtype=np.float64)
    X, Y = np.meshgrid(xs, ys)
    coords = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
    a = (j * nx + i).ravel()
    b, c, d = a + 1, a + nx, a + nx + 1
    if diagonal_rule == "/":
        slash = np.ones_like(a, dtype=bool)
    elif diagonal_rule == "\\":
        slash = np.zeros_like(a, dtype=bool)
    else:
        slash = ((i + j) % 2 == 0).ravel()
    t1 = np.where(slash[:, None], np.column_stack([a, b, d]), np.column_stack([a, b, c]))
    t2 = np.where(slash[:, None], np.column_stack([a, d, c]), np.column_stack([b, d, c]))
    tris = np.stack([t1, t2], axis=1).reshape(-1, 3)
    return build_from_arrays(coords, tris)


def star(mesh: TriMesh2, s: SimplexRef) -> set[SimplexRef]:
    """All cofaces of ``s``, including ``s`` itself."""
    out = {s}
    if s.dim == 0:
        out.update(SimplexRef(1, int(e)) for e in mesh.vertex_edges(s.id))
        out.update(SimplexRef(2, int(t)) for t in mesh.vertex_triangles(s.id))
    elif s.dim == 1:
        out.update(SimplexRef(2, t) for t in mesh.edge_triangles(s.id))
    return out


def faces(mesh: TriMesh2, s: SimplexRef) -> set[SimplexRef]:
    """All proper faces of ``s``."""
    if s.dim == 0:
        return set()
    verts = {SimplexRef(0, v) for v in mesh.vertices_of(s)}
    if s.dim == 1:
        return verts
    return verts | {SimplexRef(1, int(e)) for e in mesh.tri_edges[s.id]}


def facets(mesh: TriMesh2, s: SimplexRef) -> list[SimplexRef]:
    """Codimension-one faces of ``s``."""
    if s.dim == 1:
        return [SimplexRef(0, v) for v in mesh.vertices_of(s)]
    if s.dim == 2:
        return [SimplexRef(1, int(e)) for e in mesh.tri_edges[s.id]]
    return []


def cofacets(mesh: TriMesh2, s: SimplexRef) -> list[SimplexRef]:
    """Codimension-one cofaces of ``s``."""
    if s.dim == 0:
        return [SimplexRef(1, int(e)) for e in mesh.vertex_edges(s.id)]
    if s.dim == 1:
        return [SimplexRef(2, t) for t in mesh.edge_triangles(s.id)]
    return []


def simplex_barycenters(mesh: TriMesh2, dim: int) -> np.ndarray:
    """Barycenters of every simplex of one dimension, shape (count, 2)."""
    if dim == 0:
        return mesh.coords.copy()
    cells = mesh.edges if dim == 1 else mesh.triangles
    return mesh.coords[cells].mean(axis=1)


def all_simplices(mesh: TriMesh2) -> Sequence[SimplexRef]:
    return [SimplexRef(d, i) for d in range(3) for i in range(mesh.count(d))]
