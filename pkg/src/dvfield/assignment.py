"""Discrete vector field construction by homotopy expansion over outward stars.

Each vertex only looks at its own outward star, and outward stars are
disjoint, so vertices can be processed in any order (or in parallel) and the
result is the same.
"""

from __future__ import annotations

import heapq
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .field import as_vectors
from .mesh import SimplexRef, TriMesh2
from .weights import edge_flows, edge_winners, triangle_owners

logger = logging.getLogger(__name__)

V, E, T = 0, 1, 2


class DiscretePairing:
    """A discrete vector field: a face/coface matching plus the critical set.

    Pairs are stored as four index arrays (``-1`` = no partner):

    * ``vert_up[v]``  edge paired with vertex ``v``
    * ``edge_down[e]`` vertex paired with edge ``e``
    * ``edge_up[e]``  triangle paired with edge ``e``
    * ``tri_down[t]`` edge paired with triangle ``t``

    ``crit[d]`` flags critical simplices of dimension ``d``.
    """

    def __init__(self, nv: int, ne: int, nt: int):
        self.vert_up = np.full(nv, -1, dtype=np.int64)
        self.edge_down = np.full(ne, -1, dtype=np.int64)
        self.edge_up = np.full(ne, -1, dtype=np.int64)
        self.tri_down = np.full(nt, -1, dtype=np.int64)
        self.crit = [np.zeros(nv, dtype=bool), np.zeros(ne, dtype=bool),
                     np.zeros(nt, dtype=bool)]

    @classmethod
    def empty_for(cls, mesh: TriMesh2) -> "DiscretePairing":
        return cls(mesh.n_vertices, mesh.n_edges, mesh.n_triangles)

    def copy(self) -> "DiscretePairing":
        out = DiscretePairing.__new__(DiscretePairing)
        out.vert_up = self.vert_up.copy()
        out.edge_down = self.edge_down.copy()
        out.edge_up = self.edge_up.copy()
        out.tri_down = self.tri_down.copy()
        out.crit = [c.copy() for c in self.crit]
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscretePairing):
            return NotImplemented
        return (np.array_equal(self.vert_up, other.vert_up)
                and np.array_equal(self.edge_down, other.edge_down)
                and np.array_equal(self.edge_up, other.edge_up)
                and np.array_equal(self.tri_down, other.tri_down)
                and all(np.array_equal(a, b) for a, b in zip(self.crit, other.crit)))

    __hash__ = None

    # -- queries -----------------------------------------------------------
    def pair_up(self, s: SimplexRef) -> SimplexRef | None:
        if s.dim == V:
            p = self.vert_up[s.id]
        elif s.dim == E:
            p = self.edge_up[s.id]
        else:
            return None
        return SimplexRef(s.dim + 1, int(p)) if p >= 0 else None

    def pair_down(self, s: SimplexRef) -> SimplexRef | None:
        if s.dim == E:
            p = self.edge_down[s.id]
        elif s.dim == T:
            p = self.tri_down[s.id]
        else:
            return None
        return SimplexRef(s.dim - 1, int(p)) if p >= 0 else None

    def partner(self, s: SimplexRef) -> SimplexRef | None:
        return self.pair_up(s) or self.pair_down(s)

    def is_critical(self, s: SimplexRef) -> bool:
        return bool(self.crit[s.dim][s.id])

    @property
    def critical(self) -> list[SimplexRef]:
        """Critical simplices in ``SimplexRef`` order."""
        return [SimplexRef(d, int(i)) for d in range(3) for i in np.flatnonzero(self.crit[d])]

    def critical_counts(self) -> tuple[int, int, int]:
        return tuple(int(c.sum()) for c in self.crit)

    @property
    def n_critical(self) -> int:
        return sum(self.critical_counts())

    def pairs(self) -> list[tuple[SimplexRef, SimplexRef]]:
        out = [(SimplexRef(0, int(v)), SimplexRef(1, int(e)))
               for v, e in enumerate(self.vert_up) if e >= 0]
        out += [(SimplexRef(1, int(e)), SimplexRef(2, int(t)))
                for e, t in enumerate(self.edge_up) if t >= 0]
        return out

    # -- mutation ----------------------------------------------------------
    def set_pair(self, lo: SimplexRef, hi: SimplexRef) -> None:
        if lo.dim == V:
            self.vert_up[lo.id] = hi.id
            self.edge_down[hi.id] = lo.id
        else:
            self.edge_up[lo.id] = hi.id
            self.tri_down[hi.id] = lo.id

    def clear_pair(self, lo: SimplexRef, hi: SimplexRef) -> None:
        if lo.dim == V:
            self.vert_up[lo.id] = -1
            self.edge_down[hi.id] = -1
        else:
            self.edge_up[lo.id] = -1
            self.tri_down[hi.id] = -1

    def set_critical(self, s: SimplexRef, flag: bool = True) -> None:
        self.crit[s.dim][s.id] = flag

    def is_paired(self, s: SimplexRef) -> bool:
        if s.dim == V:
            return self.vert_up[s.id] >= 0
        if s.dim == E:
            return self.edge_down[s.id] >= 0 or self.edge_up[s.id] >= 0
        return self.tri_down[s.id] >= 0

    def __repr__(self) -> str:
        c0, c1, c2 = self.critical_counts()
        return f"DiscretePairing(critical={c0}/{c1}/{c2}, pairs={len(self.pairs())})"


@dataclass
class OutwardStars:
    """Vectorized description of every outward star of a mesh/field."""

    flows: np.ndarray          # f(lo, hi) per edge
    winners: np.ndarray        # outward vertex per edge
    owners: np.ndarray         # owning vertex per triangle, -1 if none
    edge_off: np.ndarray       # CSR: vertex -> won edges
    edge_idx: np.ndarray
    tri_off: np.ndarray        # CSR: vertex -> owned triangles
    tri_idx: np.ndarray


def _group(owner: np.ndarray, n: int):
    valid = owner >= 0
    items = np.flatnonzero(valid)
    keys = owner[valid]
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=n)
    off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    return off, items[order]


def compute_outward_stars(mesh: TriMesh2, field) -> OutwardStars:
    flows = edge_flows(mesh, field)
    winners = edge_winners(mesh, flows)
    owners = triangle_owners(mesh, winners)
    e_off, e_idx = _group(winners, mesh.n_vertices)
    t_off, t_idx = _group(owners, mesh.n_vertices)
    return OutwardStars(flows, winners, owners, e_off, e_idx, t_off, t_idx)


def unassigned_triangles(mesh: TriMesh2, field) -> set[SimplexRef]:
    """Triangles whose three edges flow out of three different vertices."""
    owners = triangle_owners(mesh, edge_winners(mesh, edge_flows(mesh, field)))
    return {SimplexRef(2, int(t)) for t in np.flatnonzero(owners < 0)}


def _expand_star(x, edge_ids, edge_f, tri_ids, tri_local):
    """Homotopy expansion inside one outward star.

    Parameters
    ----------
    x : int
        Center vertex.
    edge_ids, edge_f : list
        Edges of the outward star and the flow ``f(x, other end)`` on each.
    tri_ids : list
        Triangles of the outward star.
    tri_local : list of (int, int)
        For each triangle, local indices (into ``edge_ids``) of its two
        ``x``-incident edges.

    Returns
    -------
    pairs : list of (SimplexRef, SimplexRef)
    critical : list of SimplexRef
    """
    ne = len(edge_ids)
    if ne == 0:
        return [], [SimplexRef(V, x)]
    nt = len(tri_ids)
    # priority keys: negated flows sorted decreasing, then (dim, id)
    ekey = [((-edge_f[i],), E, edge_ids[i]) for i in range(ne)]
    tkey = []
    for k in range(nt):
        i, j = tri_local[k]
        a, b = -edge_f[i], -edge_f[j]
        tkey.append(((a, b) if a >= b else (b, a), T, tri_ids[k]))

    delta = min(range(ne), key=ekey.__getitem__)
    pairs = [(SimplexRef(V, x), SimplexRef(E, edge_ids[delta]))]
    critical = []
    if ne == 1 and nt == 0:
        return pairs, critical

    e_done = [False] * ne      # paired or critical
    t_done = [False] * nt
    e_done[delta] = True
    e_tris = [[] for _ in range(ne)]
    for k, (i, j) in enumerate(tri_local):
        e_tris[i].append(k)
        e_tris[j].append(k)

    def n_unpaired(k):
        i, j = tri_local[k]
        return (not e_done[i]) + (not e_done[j])

    def free_face(k):
        i, j = tri_local[k]
        return j if e_done[i] else i

    # heap items: (key, kind, local index); kind 1 = edge, 2 = triangle
    pq_zero = [(ekey[i], E, i) for i in range(ne) if i != delta]
    heapq.heapify(pq_zero)
    pq_one = [(tkey[k], T, k) for k in e_tris[delta] if n_unpaired(k) == 1]
    heapq.heapify(pq_one)

    while pq_one or pq_zero:
        while pq_one:
            _, _, k = heapq.heappop(pq_one)
            if t_done[k]:
                continue
            if n_unpaired(k) == 0:
                heapq.heappush(pq_zero, (tkey[k], T, k))
                continue
            i = free_face(k)
            e_done[i] = True
            t_done[k] = True
            pairs.append((SimplexRef(E, edge_ids[i]), SimplexRef(T, tri_ids[k])))
            for k2 in e_tris[i]:
                if not t_done[k2] and n_unpaired(k2) == 1:
                    heapq.heappush(pq_one, (tkey[k2], T, k2))
        # pop the most outward leftover and declare it critical
        while pq_zero:
            _, kind, i = heapq.heappop(pq_zero)
            if kind == E:
                if e_done[i]:
                    continue
                e_done[i] = True
                critical.append(SimplexRef(E, edge_ids[i]))
                for k2 in e_tris[i]:
                    if not t_done[k2] and n_unpaired(k2) == 1:
                        heapq.heappush(pq_one, (tkey[k2], T, k2))
            else:
                if t_done[i]:
                    continue
                t_done[i] = True
                critical.append(SimplexRef(T, tri_ids[i]))
            break
    return pairs, critical


def _star_arrays(mesh: TriMesh2, stars: OutwardStars, x: int):
    lo, hi = stars.edge_off[x], stars.edge_off[x + 1]
    eids = stars.edge_idx[lo:hi].tolist()
    ends = mesh.edges[eids]
    sign = np.where(ends[:, 0] == x, 1.0, -1.0)
    ef = (stars.flows[eids] * sign).tolist()
    lo, hi = stars.tri_off[x], stars.tri_off[x + 1]
    tids = stars.tri_idx[lo:hi].tolist()
    local = {e: i for i, e in enumerate(eids)}
    tri_local = []
    for t in tids:
        a, b, c = mesh.tri_edges[t].tolist()
        # the edge opposite to x is the one not containing x
        pair = [local[e] for e in (a, b, c) if e in local and x in mesh.edges[e]]
        tri_local.append((pair[0], pair[1]))
    return eids, ef, tids, tri_local


def process_single_star(mesh: TriMesh2, field, x: int, stars: OutwardStars | None = None):
    """Pairs and criticals decided inside the outward star of vertex ``x``."""
    if stars is None:
        stars = compute_outward_stars(mesh, field)
    return _expand_star(x, *_star_arrays(mesh, stars, x))


class _Kernel:
    """Per-vertex driver over plain Python lists (avoids numpy scalar overhead)."""

    def __init__(self, mesh: TriMesh2, stars: OutwardStars):
        self.e_off = stars.edge_off.tolist()
        self.e_idx = stars.edge_idx.tolist()
        self.t_off = stars.tri_off.tolist()
        self.t_idx = stars.tri_idx.tolist()
        self.flows = stars.flows.tolist()
        self.e_lo = mesh.edges[:, 0].tolist()
        self.e_hi = mesh.edges[:, 1].tolist()
        self.tri_edges = mesh.tri_edges.tolist()

    def run(self, x: int):
        lo, hi = self.e_off[x], self.e_off[x + 1]
        if lo == hi:
            return [], [SimplexRef(V, x)]
        eids = self.e_idx[lo:hi]
        flows, e_lo = self.flows, self.e_lo
        ef = [flows[e] if e_lo[e] == x else -flows[e] for e in eids]
        t0, t1 = self.t_off[x], self.t_off[x + 1]
        if t0 == t1 and hi - lo == 1:
            return [(SimplexRef(V, x), SimplexRef(E, eids[0]))], []
        tids = self.t_idx[t0:t1]
        local = {e: i for i, e in enumerate(eids)}
        tri_local = []
        for t in tids:
            pair = [local[e] for e in self.tri_edges[t] if e in local]
            tri_local.append((pair[0], pair[1]))
        return _expand_star(x, eids, ef, tids, tri_local)

    def run_range(self, start: int, stop: int):
        pairs, crit = [], []
        for x in range(start, stop):
            p, c = self.run(x)
            pairs.extend(p)
            crit.extend(c)
        return pairs, crit


def _pack(pairs, crit):
    """Compact ints for transfer between processes."""
    pa = np.array([(a.dim, a.id, b.id) for a, b in pairs], dtype=np.int64).reshape(-1, 3)
    ca = np.array([(c.dim, c.id) for c in crit], dtype=np.int64).reshape(-1, 2)
    return pa, ca


_WORKER_KERNEL: _Kernel | None = None


def _init_worker(mesh, stars):
    global _WORKER_KERNEL
    _WORKER_KERNEL = _Kernel(mesh, stars)


def _work(bounds):
    return _pack(*_WORKER_KERNEL.run_range(*bounds))


def _apply(pairing: DiscretePairing, pa: np.ndarray, ca: np.ndarray) -> None:
    vmask = pa[:, 0] == V
    v, e = pa[vmask, 1], pa[vmask, 2]
    pairing.vert_up[v] = e
    pairing.edge_down[e] = v
    e, t = pa[~vmask, 1], pa[~vmask, 2]
    pairing.edge_up[e] = t
    pairing.tri_down[t] = e
    for d in range(3):
        pairing.crit[d][ca[ca[:, 0] == d, 1]] = True


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DVF_THREADS", "1")))
    except ValueError:
        return 1


def process_outward_stars(mesh: TriMesh2, field, workers: int = 1,
                          stars: OutwardStars | None = None,
                          vertex_order=None) -> DiscretePairing:
    """Compute the discrete vector field of a PL vector field.

    Parameters
    ----------
    mesh : TriMesh2
    field : VectorField or array_like, shape (V, 2)
    workers : int
        Number of worker processes. ``1`` runs serially; any other value
        yields a bit-identical result.
    stars : OutwardStars, optional
        Precomputed outward stars (see :func:`compute_outward_stars`).
    vertex_order : sequence of int, optional
        Serial processing order; only useful for testing order independence.
    """
    as_vectors(field)
    if stars is None:
        stars = compute_outward_stars(mesh, field)
    pairing = DiscretePairing.empty_for(mesh)
    nv = mesh.n_vertices
    if workers <= 1 or nv < 2 * workers:
        kernel = _Kernel(mesh, stars)
        if vertex_order is None:
            pa, ca = _pack(*kernel.run_range(0, nv))
        else:
            pairs, crit = [], []
            for x in vertex_order:
                p, c = kernel.run(int(x))
                pairs.extend(p)
                crit.extend(c)
            pa, ca = _pack(pairs, crit)
        _apply(pairing, pa, ca)
    else:
        bounds = np.linspace(0, nv, 4 * workers + 1).astype(int)
        chunks = list(zip(bounds[:-1].tolist(), bounds[1:].tolist()))
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(mesh, stars)) as pool:
            for pa, ca in pool.map(_work, chunks):
                _apply(pairing, pa, ca)
    # simplices in no outward star stay unpaired and are critical
    pairing.crit[T][stars.owners < 0] = True
    return pairing
