"""Weight-ranked saddle cancellation.

Every saddle contributes up to four separatrices. Each separatrix that ends
at a critical simplex or on a closed orbit becomes a cancellation candidate
costed by the absolute value of its path weight. Candidates are executed
cheapest first by reversing the pairs along the path:

* saddle/extremum: both ends become regular;
* saddle/orbit: the saddle slides onto the cycle and the orbit opens up,
  leaving the critical counts unchanged.

Queue entries are validated lazily on pop (generation stamp plus a re-trace).
"""

from __future__ import annotations

import heapq
import logging
import warnings
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

from .assignment import DiscretePairing
from .errors import IllegalReversal, StalePath, TargetUnreachable
from .mesh import SimplexRef, TriMesh2
from .skeleton import Endpoint, Tracer, VPath
from .weights import WeightCache

logger = logging.getLogger(__name__)


@dataclass(order=True)
class CancellationCandidate:
    cost: float
    saddle: SimplexRef
    partner: tuple
    start: SimplexRef
    stamp: int = dc_field(compare=False)
    path: VPath = dc_field(compare=False)

    @property
    def is_orbit(self) -> bool:
        return self.path.endpoint is Endpoint.ORBIT


class SimplifyResult(NamedTuple):
    pairing: DiscretePairing
    curve: list[tuple[int, float]]
    reached: bool


def _partner_ref(path: VPath):
    if path.endpoint is Endpoint.CRITICAL:
        return path.terminal
    return path.cycle_pairs()[0][0]


def _endpoint_key(path: VPath):
    """Connection key: the critical simplex, or the orbit's canonical cycle."""
    if path.endpoint is Endpoint.CRITICAL:
        return path.terminal
    if path.endpoint is Endpoint.ORBIT:
        return ("orbit", path.index, path.cycle_pairs())
    return None


# -- reversal ---------------------------------------------------------------

def _old_pairs(path: VPath, upto: int):
    """Pairs ``(lo, hi)`` currently along the trace, up to step index ``upto``."""
    s = path.steps
    out = []
    for i in range(1, upto, 2):
        a, b = s[i], s[i + 1]
        out.append((a, b) if a.dim < b.dim else (b, a))
    return out


def _new_pairs(path: VPath, upto: int):
    s = path.steps
    out = []
    for i in range(1, upto + 1, 2):
        a, b = s[i], s[i - 1]
        out.append((a, b) if a.dim < b.dim else (b, a))
    return out


def _check_current(pairing: DiscretePairing, path: VPath) -> None:
    if not pairing.is_critical(path.saddle):
        raise StalePath(f"{path.saddle!r} is no longer critical")
    end = len(path.steps) - 1
    if path.endpoint is Endpoint.CRITICAL:
        if not pairing.is_critical(path.terminal):
            raise StalePath(f"{path.terminal!r} is no longer critical")
        end -= 1
    for lo, hi in _old_pairs(path, end):
        if pairing.pair_up(lo) != hi:
            raise StalePath(f"pair {lo!r}->{hi!r} no longer present")


def reverse_pairs(pairing: DiscretePairing, path: VPath) -> SimplexRef | None:
    """Reverse the pairs along ``path`` in place.

    Each simplex at an odd trace position is re-paired with the one before
    it. For a critical endpoint both the saddle and the endpoint become
    regular and ``None`` is returned. For an orbit the last anti-pair of the
    cycle is left alone; the edge it starts from becomes the new saddle and
    is returned.
    """
    if path.endpoint is Endpoint.BOUNDARY:
        raise StalePath("boundary-exit paths cannot be cancelled")
    _check_current(pairing, path)
    s = path.steps
    last = len(s) - 1
    if path.endpoint is Endpoint.CRITICAL:
        old, new = _old_pairs(path, last - 1), _new_pairs(path, last)
    else:
        old, new = _old_pairs(path, last), _new_pairs(path, last - 2)
    for lo, hi in old:
        pairing.clear_pair(lo, hi)
    for lo, hi in new:
        if pairing.is_paired(lo) or pairing.is_paired(hi):
            raise IllegalReversal(f"{lo!r} or {hi!r} already paired")
        pairing.set_pair(lo, hi)
    pairing.set_critical(path.saddle, False)
    if path.endpoint is Endpoint.CRITICAL:
        pairing.set_critical(path.terminal, False)
        return None
    slid = s[last - 1]
    pairing.set_critical(slid, True)
    return slid


def unreverse_pairs(pairing: DiscretePairing, path: VPath) -> None:
    """Undo :func:`reverse_pairs` for a saddle/extremum path."""
    if path.endpoint is not Endpoint.CRITICAL:
        raise ValueError("only saddle/extremum reversals can be undone")
    last = len(path.steps) - 1
    for lo, hi in _new_pairs(path, last):
        if pairing.pair_up(lo) != hi:
            raise StalePath(f"pair {lo!r}->{hi!r} not present")
        pairing.clear_pair(lo, hi)
    for lo, hi in _old_pairs(path, last - 1):
        pairing.set_pair(lo, hi)
    pairing.set_critical(path.saddle, True)
    pairing.set_critical(path.terminal, True)


# -- state ------------------------------------------------------------------

class SimplifyState:
    """Queue, connection map and guards for one simplification run."""

    def __init__(self, pairing: DiscretePairing, mesh: TriMesh2, field):
        self.pairing = pairing
        self.mesh = mesh
        self.tracer = Tracer(mesh, pairing, WeightCache(mesh, field))
        self.queue: list[CancellationCandidate] = []
        self.connections: dict[SimplexRef, set] = {}   # saddle -> endpoint keys
        self.reached_by: dict = {}                      # endpoint key -> saddles
        self.paths: dict[SimplexRef, list[VPath]] = {}
        self.stamp: dict[SimplexRef, int] = {}
        self.orbit_guard: dict[SimplexRef, int] = {}

    def saddles(self) -> list[SimplexRef]:
        return [s for s in self.pairing.critical if s.dim == 1]

    def n_saddles(self) -> int:
        return int(self.pairing.crit[1].sum())

    def _forget(self, saddle: SimplexRef) -> None:
        for key in self.connections.pop(saddle, ()):
            group = self.reached_by.get(key)
            if group is not None:
                group.discard(saddle)
                if not group:
                    del self.reached_by[key]
        self.paths.pop(saddle, None)

    def refresh(self, saddle: SimplexRef) -> None:
        """Re-trace one saddle and push fresh candidates for it."""
        self._forget(saddle)
        self.stamp[saddle] = self.stamp.get(saddle, 0) + 1
        if not self.pairing.is_critical(saddle):
            self.orbit_guard.pop(saddle, None)
            return
        paths = self.tracer.all_paths(saddle)
        self.paths[saddle] = paths
        keys = set()
        for p in paths:
            k = _endpoint_key(p)
            if k is not None:
                keys.add(k)
                self.reached_by.setdefault(k, set()).add(saddle)
        self.connections[saddle] = keys
        stamp = self.stamp[saddle]
        for p in paths:
            if p.endpoint is Endpoint.BOUNDARY or self._suppressed(saddle, p, paths):
                continue
            heapq.heappush(self.queue, CancellationCandidate(
                abs(p.weight), saddle, (p.index, _partner_ref(p)), p.steps[1], stamp, p))

    def _suppressed(self, saddle: SimplexRef, p: VPath, paths: list[VPath]) -> bool:
        # multiplicity guard: both same-index paths reach the same extremum or
        # orbit, so reversing one would close a loop through the other
        key = p.partner_key
        twins = [q for q in paths if q.index == p.index and q.partner_key == key]
        if len(twins) > 1:
            return True
        return p.endpoint is Endpoint.ORBIT and self.orbit_guard.get(saddle) == p.index

    def build(self) -> None:
        for s in self.saddles():
            self.refresh(s)

    def pop_valid(self) -> CancellationCandidate | None:
        """Next executable candidate, refreshing saddles whose traces went stale."""
        while self.queue:
            c = heapq.heappop(self.queue)
            if c.stamp != self.stamp.get(c.saddle) or not self.pairing.is_critical(c.saddle):
                continue
            p = c.path
            fresh = (self.tracer.descend(c.saddle, c.start.id) if p.index == 0
                     else self.tracer.ascend(c.saddle, c.start.id))
            if fresh.steps != p.steps or fresh.endpoint is not p.endpoint:
                self.refresh(c.saddle)
                continue
            if p.endpoint is Endpoint.CRITICAL and not self.pairing.is_critical(p.terminal):
                self.refresh(c.saddle)
                continue
            return c
        return None

    def execute(self, c: CancellationCandidate) -> SimplexRef | None:
        p = c.path
        affected = set(self.reached_by.get(_endpoint_key(p), ()))
        slid = reverse_pairs(self.pairing, p)
        affected.add(c.saddle)
        self.orbit_guard.pop(c.saddle, None)
        if slid is not None:
            self.orbit_guard[slid] = p.index
            affected.add(slid)
        for s in sorted(affected):
            self.refresh(s)
        return slid


def follow_vpaths(pairing: DiscretePairing, mesh: TriMesh2, field):
    """Trace every saddle; returns ``(queue, connections)``."""
    st = SimplifyState(pairing, mesh, field)
    st.build()
    return st.queue, st.connections


def saddles_for_criticals(mesh: TriMesh2, n_criticals: int) -> int:
    """Saddle count implied by a total critical count via the Euler identity."""
    diff = n_criticals - mesh.euler_characteristic
    if diff < 0 or diff % 2:
        raise ValueError(
            f"{n_criticals} criticals is incompatible with Euler characteristic "
            f"{mesh.euler_characteristic}")
    return diff // 2


def simplify_to(pairing: DiscretePairing, mesh: TriMesh2, field, target_saddles: int,
                max_cost: float | None = None, max_orbit_moves: int | None = None,
                in_place: bool = False, check=None) -> SimplifyResult:
    """Cancel cheapest separatrices until at most ``target_saddles`` remain.

    Parameters
    ----------
    pairing : DiscretePairing
        Starting field; copied unless ``in_place``.
    target_saddles : int
        Stop once the number of critical edges is at or below this.
    max_cost : float, optional
        Stop before executing a candidate more expensive than this.
    max_orbit_moves : int, optional
        Cap on saddle/orbit slides (default: four per initial saddle plus 64).
    check : callable, optional
        Called as ``check(pairing)`` after every executed cancellation.

    Returns
    -------
    SimplifyResult
        ``(pairing, curve, reached)`` where ``curve`` lists
        ``(remaining_criticals, cost)`` per executed cancellation.
    """
    if target_saddles < 0:
        raise ValueError("target_saddles must be non-negative")
    if not in_place:
        pairing = pairing.copy()
    st = SimplifyState(pairing, mesh, field)
    curve: list[tuple[int, float]] = []
    if st.n_saddles() <= target_saddles:
        return SimplifyResult(pairing, curve, True)
    st.build()
    if max_orbit_moves is None:
        max_orbit_moves = 4 * st.n_saddles() + 64
    orbit_moves = 0
    n_crit = pairing.n_critical
    while st.n_saddles() > target_saddles:
        c = st.pop_valid()
        if c is None:
            break
        if max_cost is not None and c.cost > max_cost:
            break
        if c.is_orbit:
            if orbit_moves >= max_orbit_moves:
                continue
            orbit_moves += 1
        st.execute(c)
        if not c.is_orbit:
            n_crit -= 2
        curve.append((n_crit, c.cost))
        if check is not None:
            check(pairing)
    reached = st.n_saddles() <= target_saddles
    if not reached and max_cost is None:
        warnings.warn(f"stopped at {st.n_saddles()} saddles, target {target_saddles}",
                      TargetUnreachable, stacklevel=2)
    logger.info("simplified to %d criticals in %d steps (%d orbit slides)",
                n_crit, len(curve), orbit_moves)
    return SimplifyResult(pairing, curve, reached)


def weight_curve_csv(curve) -> list[str]:
    """CSV lines ``num_criticals,cost`` (header first) in execution order."""
    if not curve:
        return []
    return ["num_criticals,cost"] + [f"{n},{c:.17g}" for n, c in curve]
