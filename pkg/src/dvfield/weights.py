"""Local alignment measures between the discrete and the continuous field.

``pair_weight`` scores a face/coface couple, ``edge_flow`` is the signed
flow strength along an edge, and the outward star of a vertex collects the
part of its star that the field leaves through.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MalformedPath, NotAFacePair
from .field import as_vectors
from .mesh import SimplexRef, TriMesh2


def _center_and_value(mesh: TriMesh2, vec: np.ndarray, s: SimplexRef):
    verts = list(mesh.vertices_of(s))
    return mesh.coords[verts].mean(axis=0), vec[verts].mean(axis=0)


def pair_weight(mesh: TriMesh2, field, alpha: SimplexRef, beta: SimplexRef) -> float:
    """Alignment of the discrete vector ``alpha -> beta`` with the field.

    Mean of the interpolated field at both barycenters, dotted with the
    offset from the barycenter of ``alpha`` to that of ``beta``.
    """
    if not mesh.is_face(alpha, beta):
        raise NotAFacePair(f"{alpha!r} is not a facet of {beta!r}")
    vec = as_vectors(field)
    ca, fa = _center_and_value(mesh, vec, alpha)
    cb, fb = _center_and_value(mesh, vec, beta)
    mx, my = 0.5 * (fa + fb)
    dx, dy = cb - ca
    return float(mx * dx + my * dy)


def edge_flow(mesh: TriMesh2, field, v0: int, v1: int) -> float:
    """Signed flow strength from ``v0`` to ``v1`` along their shared edge."""
    mesh.edge_id(v0, v1)  # raises NoSuchEdge
    vec = as_vectors(field)
    mx, my = 0.5 * (vec[v0] + vec[v1])
    dx, dy = mesh.coords[v1] - mesh.coords[v0]
    # same operation order as edge_flows so ties agree bit for bit
    return float(mx * dx + my * dy)


def edge_flows(mesh: TriMesh2, field) -> np.ndarray:
    """``f(v_lo, v_hi)`` for every edge, oriented from its lower vertex id."""
    vec = as_vectors(field)
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    mean = 0.5 * (vec[a] + vec[b])
    d = mesh.coords[b] - mesh.coords[a]
    return mean[:, 0] * d[:, 0] + mean[:, 1] * d[:, 1]


def edge_winners(mesh: TriMesh2, flows: np.ndarray) -> np.ndarray:
    """Vertex each edge flows out of; exact zero flow goes to the lower id."""
    return np.where(flows >= 0.0, mesh.edges[:, 0], mesh.edges[:, 1])


def triangle_owners(mesh: TriMesh2, winners: np.ndarray) -> np.ndarray:
    """Vertex whose outward star contains each triangle, or -1 for none.

    A triangle belongs to ``x`` iff ``x`` wins both of its edges through
    ``x``; when all three edges have different winners it belongs to nobody.
    """
    w = winners[mesh.tri_edges]  # edges (a,b), (a,c), (b,c)
    owner = np.full(len(w), -1, dtype=np.int64)
    owner = np.where(w[:, 0] == w[:, 1], w[:, 0], owner)
    owner = np.where(w[:, 0] == w[:, 2], w[:, 0], owner)
    owner = np.where(w[:, 1] == w[:, 2], w[:, 1], owner)
    return owner


def edge_direction(mesh: TriMesh2, field, e: int) -> int:
    a, b = (int(v) for v in mesh.edges[e])
    f = edge_flow(mesh, field, a, b)
    if f > 0:
        return a
    if f < 0:
        return b
    return min(a, b)


@dataclass(frozen=True)
class OutwardStar:
    center: int
    members: frozenset

    @property
    def edges(self) -> list[SimplexRef]:
        return sorted(s for s in self.members if s.dim == 1)

    @property
    def triangles(self) -> list[SimplexRef]:
        return sorted(s for s in self.members if s.dim == 2)

    def __contains__(self, s) -> bool:
        return s in self.members

    def __len__(self) -> int:
        return len(self.members)


def outward_star(mesh: TriMesh2, field, x: int) -> OutwardStar:
    """Vertex ``x`` plus every coface whose ``x``-incident edges all flow out of ``x``."""
    members = {SimplexRef(0, x)}
    won = set()
    for e in mesh.vertex_edges(x):
        e = int(e)
        if edge_direction(mesh, field, e) == x:
            won.add(e)
            members.add(SimplexRef(1, e))
    for t in mesh.vertex_triangles(x):
        incident = [int(e) for e in mesh.tri_edges[t] if x in mesh.edges[e]]
        if all(e in won for e in incident):
            members.add(SimplexRef(2, int(t)))
    return OutwardStar(x, frozenset(members))


def vpath_weight(mesh: TriMesh2, field, path: Sequence[SimplexRef]) -> float:
    """Alternating sum of pair weights along a sequence of simplices.

    Steps up in dimension (``alpha -> beta``, a pair) add ``w(alpha, beta)``;
    steps down (``beta -> alpha``, an anti-pair) subtract ``w(alpha, beta)``.
    The sequence is read in flow order.
    """
    steps = list(getattr(path, "flow_steps", path))
    total = 0.0
    for s, t in zip(steps, steps[1:]):
        if t.dim == s.dim + 1:
            total += pair_weight(mesh, field, s, t)
        elif s.dim == t.dim + 1:
            total -= pair_weight(mesh, field, t, s)
        else:
            raise MalformedPath(f"{s!r} -> {t!r} is not a pair or anti-pair")
    return total


def edge_flow_table(mesh: TriMesh2, field) -> list[tuple[int, int, int, float, int]]:
    """Rows ``(eid, v0, v1, f_value, winner)`` for the per-edge debug dump."""
    flows = edge_flows(mesh, field)
    winners = edge_winners(mesh, flows)
    return [(e, int(a), int(b), float(f), int(w))
            for e, ((a, b), f, w) in enumerate(zip(mesh.edges, flows, winners))]


class WeightCache:
    """Barycenters and interpolated field values for fast repeated weights."""

    def __init__(self, mesh: TriMesh2, field):
        vec = as_vectors(field)
        self.mesh = mesh
        self.center = []
        self.value = []
        for cells in (np.arange(mesh.n_vertices)[:, None], mesh.edges, mesh.triangles):
            self.center.append(mesh.coords[cells].mean(axis=1).tolist())
            self.value.append(vec[cells].mean(axis=1).tolist())

    def w(self, alpha: SimplexRef, beta: SimplexRef) -> float:
        """Pair weight, assuming ``alpha`` is a facet of ``beta`` (unchecked)."""
        ca = self.center[alpha.dim][alpha.id]
        cb = self.center[beta.dim][beta.id]
        fa = self.value[alpha.dim][alpha.id]
        fb = self.value[beta.dim][beta.id]
        return (0.5 * (fa[0] + fb[0])) * (cb[0] - ca[0]) + (0.5 * (fa[1] + fb[1])) * (cb[1] - ca[1])

    def path_weight(self, steps: Sequence[SimplexRef]) -> float:
        total = 0.0
        for s, t in zip(steps, steps[1:]):
            if t.dim > s.dim:
                total += self.w(s, t)
            else:
                total -= self.w(t, s)
        return total
