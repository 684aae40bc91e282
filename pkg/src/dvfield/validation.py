"""Structural checks and brute-force oracles.

Nothing here imports the fast construction code: the oracles only read
the mesh arrays and the pairing, so they can be used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import networkx as nx
import numpy as np

from .mesh import SimplexRef, TriMesh2

CHECKS = ("matching", "face_legality", "partition", "euler")


@dataclass
class ValidationReport:
    """Per-check counterexamples; an empty list means the check passed."""

    failures: dict[str, list] = dc_field(default_factory=lambda: {c: [] for c in CHECKS})
    counts: tuple[int, int, int] = (0, 0, 0)

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def __bool__(self) -> bool:
        return self.ok

    def passed(self, check: str) -> bool:
        return not self.failures[check]

    def summary(self) -> str:
        lines = []
        for c in CHECKS:
            bad = self.failures[c]
            lines.append(f"{c}: {'ok' if not bad else 'FAIL ' + repr(bad[:5])}")
        return "\n".join(lines)


def validate_pairing(mesh: TriMesh2, pairing) -> ValidationReport:
    """Check that ``pairing`` is a legal discrete vector field on ``mesh``."""
    rep = ValidationReport()
    f = rep.failures
    nv, ne, nt = mesh.n_vertices, mesh.n_edges, mesh.n_triangles

    # matching: the four arrays must agree, and no edge may be paired twice
    for v in range(nv):
        e = int(pairing.vert_up[v])
        if e >= 0 and (e >= ne or pairing.edge_down[e] != v):
            f["matching"].append(SimplexRef(0, v))
    for e in range(ne):
        d, u = int(pairing.edge_down[e]), int(pairing.edge_up[e])
        if d >= 0 and (d >= nv or pairing.vert_up[d] != e):
            f["matching"].append(SimplexRef(1, e))
        if u >= 0 and (u >= nt or pairing.tri_down[u] != e):
            f["matching"].append(SimplexRef(1, e))
        if d >= 0 and u >= 0:
            f["matching"].append(SimplexRef(1, e))
    for t in range(nt):
        e = int(pairing.tri_down[t])
        if e >= 0 and (e >= ne or pairing.edge_up[e] != t):
            f["matching"].append(SimplexRef(2, t))

    # face legality
    for v in range(nv):
        e = int(pairing.vert_up[v])
        if 0 <= e < ne and v not in mesh.edges[e]:
            f["face_legality"].append(SimplexRef(0, v))
    for t in range(nt):
        e = int(pairing.tri_down[t])
        if 0 <= e < ne and e not in mesh.tri_edges[t]:
            f["face_legality"].append(SimplexRef(2, t))

    # partition: every simplex is exactly one of paired / critical
    paired = [pairing.vert_up >= 0,
              (pairing.edge_down >= 0) | (pairing.edge_up >= 0),
              pairing.tri_down >= 0]
    for d in range(3):
        bad = np.flatnonzero(paired[d] == pairing.crit[d])
        f["partition"].extend(SimplexRef(d, int(i)) for i in bad)

    rep.counts = tuple(int(c.sum()) for c in pairing.crit)
    c0, c1, c2 = rep.counts
    if c0 - c1 + c2 != mesh.euler_characteristic:
        f["euler"].append(rep.counts)
    for k in f:
        f[k] = sorted(set(f[k])) if k != "euler" else f[k]
    return rep


# -- outward stars by direct scan --------------------------------------------

def _flow(coords, vec, a: int, b: int) -> float:
    mx, my = 0.5 * (vec[a] + vec[b])
    dx, dy = coords[b] - coords[a]
    return float(mx * dx + my * dy)


def _flows_out(coords, vec, x: int, y: int) -> bool:
    """Does the edge {x, y} carry flow away from ``x``? Zero goes to the lower id."""
    lo, hi = (x, y) if x < y else (y, x)
    f = _flow(coords, vec, lo, hi)
    winner = lo if f >= 0.0 else hi
    return winner == x


def brute_force_outward(mesh: TriMesh2, field) -> list[frozenset]:
    """Outward star of every vertex, by scanning all edges and triangles."""
    vec = np.asarray(getattr(field, "vectors", field), dtype=np.float64)
    coords = mesh.coords
    edges = [tuple(int(v) for v in e) for e in mesh.edges]
    tris = [tuple(int(v) for v in t) for t in mesh.triangles]
    edge_index = {e: i for i, e in enumerate(edges)}
    out = []
    for x in range(mesh.n_vertices):
        members = {SimplexRef(0, x)}
        for i, (a, b) in enumerate(edges):
            if x in (a, b) and _flows_out(coords, vec, x, b if a == x else a):
                members.add(SimplexRef(1, i))
        for i, t in enumerate(tris):
            if x not in t:
                continue
            others = [v for v in t if v != x]
            if all(SimplexRef(1, edge_index[tuple(sorted((x, y)))]) in members for y in others):
                members.add(SimplexRef(2, i))
        out.append(frozenset(members))
    return out


# -- orbit census -------------------------------------------------------------

@dataclass
class OrbitCensus:
    cycles: list[tuple]          # canonical pair cycles in flow order
    index: list[int]

    def __len__(self) -> int:
        return len(self.cycles)

    def as_set(self) -> set:
        return {(i, c) for i, c in zip(self.index, self.cycles)}


def _canonical(cycle: list) -> tuple:
    k = min(range(len(cycle)), key=cycle.__getitem__)
    return tuple(cycle[k:] + cycle[:k])


def exhaustive_vpath_audit(mesh: TriMesh2, pairing, max_cycles: int = 100_000) -> OrbitCensus:
    """Every closed V-path, found as a simple cycle of the pair graph.

    Nodes are pairs ``(alpha, beta)``; a pair links to ``(alpha', beta')``
    when ``alpha'`` is a facet of ``beta`` other than ``alpha`` and is itself
    paired upward with ``beta'``.
    """
    g = nx.DiGraph()
    for v in range(mesh.n_vertices):
        e = int(pairing.vert_up[v])
        if e < 0:
            continue
        node = (SimplexRef(0, v), SimplexRef(1, e))
        g.add_node(node)
        for w in mesh.edges[e]:
            w = int(w)
            e2 = int(pairing.vert_up[w])
            if w != v and e2 >= 0:
                g.add_edge(node, (SimplexRef(0, w), SimplexRef(1, e2)))
    for e in range(mesh.n_edges):
        t = int(pairing.edge_up[e])
        if t < 0:
            continue
        node = (SimplexRef(1, e), SimplexRef(2, t))
        g.add_node(node)
        for f2 in mesh.tri_edges[t]:
            f2 = int(f2)
            t2 = int(pairing.edge_up[f2])
            if f2 != e and t2 >= 0:
                g.add_edge(node, (SimplexRef(1, f2), SimplexRef(2, t2)))
    cycles, index = [], []
    for i, cyc in enumerate(nx.simple_cycles(g)):
        if i >= max_cycles:
            raise RuntimeError(f"more than {max_cycles} cycles; mesh too large for the audit")
        cycles.append(_canonical(cyc))
        index.append(cyc[0][0].dim)
    order = sorted(range(len(cycles)), key=lambda k: (index[k], cycles[k]))
    return OrbitCensus([cycles[k] for k in order], [index[k] for k in order])
