"""V-path tracing and topological skeleton extraction.

Separatrices start at a critical edge (saddle). Index-0 paths follow
vertex->edge pairs downstream to a critical vertex; index-1 paths follow
edge->triangle pairs upstream to a critical triangle. Either kind can end
in a closed orbit, and index-1 paths can also leave through the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np

from .assignment import DiscretePairing
from .mesh import SimplexRef, TriMesh2
from .weights import WeightCache

V, E, T = 0, 1, 2


class Endpoint(enum.Enum):
    CRITICAL = "critical"
    ORBIT = "orbit"
    BOUNDARY = "boundary"


@dataclass
class VPath:
    """A separatrix traced from a saddle.

    ``steps`` holds the simplices in trace order, starting with the saddle.
    For index 0 that is the flow direction; index-1 paths are traced against
    the flow. When ``endpoint`` is ``ORBIT`` the last step repeats the
    simplex at ``steps[orbit_start]``.
    """

    index: int
    steps: list[SimplexRef]
    endpoint: Endpoint
    terminal: SimplexRef | None = None
    orbit_start: int | None = None
    weight: float = 0.0

    @property
    def saddle(self) -> SimplexRef:
        return self.steps[0]

    @property
    def flow_steps(self) -> list[SimplexRef]:
        return self.steps if self.index == 0 else self.steps[::-1]

    def cycle_pairs(self) -> tuple[tuple[SimplexRef, SimplexRef], ...]:
        """Pairs of the closed orbit, in flow order, rotated to start at the smallest."""
        if self.endpoint is not Endpoint.ORBIT:
            return ()
        seg = self.steps[self.orbit_start:]
        if self.index == 0:
            pairs = [(seg[i], seg[i + 1]) for i in range(0, len(seg) - 1, 2)]
        else:
            pairs = [(seg[i + 1], seg[i]) for i in range(0, len(seg) - 1, 2)][::-1]
        k = min(range(len(pairs)), key=pairs.__getitem__)
        return tuple(pairs[k:] + pairs[:k])

    @property
    def partner_key(self):
        """Hashable identity of what the path reaches (critical simplex or orbit)."""
        if self.endpoint is Endpoint.CRITICAL:
            return ("critical", self.terminal)
        if self.endpoint is Endpoint.ORBIT:
            return ("orbit", self.index, self.cycle_pairs())
        return ("boundary", self.steps[-1])

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class Orbit:
    index: int
    pairs: tuple[tuple[SimplexRef, SimplexRef], ...]

    @property
    def label(self) -> str:
        return "attracting" if self.index == 0 else "repelling"

    @property
    def simplices(self) -> list[SimplexRef]:
        out = []
        for a, b in self.pairs:
            out += [a, b]
        return out


@dataclass
class Skeleton:
    criticals: list[tuple[SimplexRef, int]]
    separatrices: list[VPath]
    orbits: list[Orbit] = dc_field(default_factory=list)

    def counts(self) -> tuple[int, int, int]:
        c = [0, 0, 0]
        for _, i in self.criticals:
            c[i] += 1
        return tuple(c)


# -- tracing ---------------------------------------------------------------

class Tracer:
    """Traces separatrices over a (possibly changing) pairing.

    Holds plain-list views of the mesh so repeated tracing stays cheap.
    """

    def __init__(self, mesh: TriMesh2, pairing: DiscretePairing, weights: WeightCache | None = None):
        self.mesh = mesh
        self.pairing = pairing
        self.weights = weights
        self._edges = mesh.edges.tolist()
        self._edge_tris = mesh.edge_tris.tolist()

    def _finish(self, path: VPath) -> VPath:
        if self.weights is not None:
            path.weight = self.weights.path_weight(path.flow_steps)
        return path

    def descend(self, saddle: SimplexRef, v: int) -> VPath:
        p = self.pairing
        crit0, vert_up = p.crit[V], p.vert_up
        steps = [saddle]
        seen: dict[int, int] = {}
        while True:
            steps.append(SimplexRef(V, v))
            if crit0[v]:
                return self._finish(VPath(0, steps, Endpoint.CRITICAL, terminal=steps[-1]))
            if v in seen:
                return self._finish(VPath(0, steps, Endpoint.ORBIT, orbit_start=seen[v]))
            seen[v] = len(steps) - 1
            e = int(vert_up[v])
            if e < 0:
                raise ValueError(f"vertex {v} is neither critical nor paired")
            steps.append(SimplexRef(E, e))
            a, b = self._edges[e]
            v = b if a == v else a

    def ascend(self, saddle: SimplexRef, t: int) -> VPath:
        p = self.pairing
        crit2, tri_down = p.crit[T], p.tri_down
        steps = [saddle]
        seen: dict[int, int] = {}
        while True:
            steps.append(SimplexRef(T, t))
            if crit2[t]:
                return self._finish(VPath(1, steps, Endpoint.CRITICAL, terminal=steps[-1]))
            if t in seen:
                return self._finish(VPath(1, steps, Endpoint.ORBIT, orbit_start=seen[t]))
            seen[t] = len(steps) - 1
            e = int(tri_down[t])
            if e < 0:
                raise ValueError(f"triangle {t} is neither critical nor paired")
            steps.append(SimplexRef(E, e))
            t0, t1 = self._edge_tris[e]
            nxt = t1 if t0 == t else t0
            if nxt < 0:
                return self._finish(VPath(1, steps, Endpoint.BOUNDARY))
            t = nxt

    def descending(self, saddle: SimplexRef) -> list[VPath]:
        a, b = self._edges[saddle.id]
        return [self.descend(saddle, a), self.descend(saddle, b)]

    def ascending(self, saddle: SimplexRef) -> list[VPath]:
        return [self.ascend(saddle, t) for t in self._edge_tris[saddle.id] if t >= 0]

    def all_paths(self, saddle: SimplexRef) -> list[VPath]:
        return self.descending(saddle) + self.ascending(saddle)


def trace_descending(pairing: DiscretePairing, mesh: TriMesh2, saddle: SimplexRef,
                     field=None) -> list[VPath]:
    """The two index-0 separatrices of a critical edge, one per endpoint vertex."""
    _check_saddle(pairing, saddle)
    w = WeightCache(mesh, field) if field is not None else None
    return Tracer(mesh, pairing, w).descending(saddle)


def trace_ascending(pairing: DiscretePairing, mesh: TriMesh2, saddle: SimplexRef,
                    field=None) -> list[VPath]:
    """The index-1 separatrices of a critical edge, one per incident triangle."""
    _check_saddle(pairing, saddle)
    w = WeightCache(mesh, field) if field is not None else None
    return Tracer(mesh, pairing, w).ascending(saddle)


def _check_saddle(pairing: DiscretePairing, saddle: SimplexRef) -> None:
    if saddle.dim != E or not pairing.is_critical(saddle):
        raise ValueError(f"{saddle!r} is not a critical edge")


def extract_skeleton(pairing: DiscretePairing, mesh: TriMesh2, field) -> Skeleton:
    """Critical simplices, all saddle separatrices and the orbits they reach."""
    tracer = Tracer(mesh, pairing, WeightCache(mesh, field))
    criticals = [(s, s.dim) for s in pairing.critical]
    seps: list[VPath] = []
    orbits: dict = {}
    for s, idx in criticals:
        if idx != 1:
            continue
        for path in tracer.all_paths(s):
            seps.append(path)
            if path.endpoint is Endpoint.ORBIT:
                key = (path.index, path.cycle_pairs())
                if key not in orbits:
                    orbits[key] = Orbit(path.index, key[1])
    return Skeleton(criticals, seps, [orbits[k] for k in sorted(orbits)])


# -- chaining diagnostic -----------------------------------------------------

@dataclass
class ChainStats:
    lengths: list[int]
    chains: list[list[SimplexRef]]

    @property
    def longest(self) -> int:
        return max(self.lengths, default=0)


def count_chains(skeleton: Skeleton, mesh: TriMesh2, max_link_distance: float = 1.5) -> ChainStats:
    """Group criticals into chains of alternating index.

    Two critical simplices are linked when their dimensions differ by one
    and their barycenters are at most ``max_link_distance`` apart; chains
    are the connected components of that graph, longest first.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    refs = [s for s, _ in skeleton.criticals]
    if not refs:
        return ChainStats([], [])
    pts = np.array([mesh.coords[list(mesh.vertices_of(s))].mean(axis=0) for s in refs])
    dims = np.array([s.dim for s in refs])
    pairs = np.array(sorted(cKDTree(pts).query_pairs(max_link_distance)), dtype=np.int64).reshape(-1, 2)
    if len(pairs):
        pairs = pairs[np.abs(dims[pairs[:, 0]] - dims[pairs[:, 1]]) == 1]
    n = len(refs)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    groups: dict[int, list[SimplexRef]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(refs[i])
    chains = sorted(groups.values(), key=lambda c: (-len(c), c[0]))
    return ChainStats([len(c) for c in chains], chains)
