import warnings

import numpy as np
import pytest

from test_skeleton import triangle_orbit
from dvfield import simplify as simp
from dvfield.assignment import DiscretePairing, process_outward_stars
from dvfield.errors import StalePath, TargetUnreachable
from dvfield.field import VectorField
from dvfield.mesh import edge, grid_triangulation, triangle, vertex
from dvfield.simplify import (SimplifyState, follow_vpaths, reverse_pairs, saddles_for_criticals,
                              simplify_to, unreverse_pairs, weight_curve_csv)
from dvfield.skeleton import Endpoint, Tracer, trace_descending
from dvfield.validation import exhaustive_vpath_audit, validate_pairing


def strip():
    """3x2 grid: minima at vertices 0 and 2, saddle (0, 1) between them."""
    m = grid_triangulation(3, 2)
    p = DiscretePairing.empty_for(m)
    e = m.edge_id
    p.set_critical(vertex(0))
    p.set_critical(vertex(2))
    p.set_critical(edge(e(0, 1)))
    for v, w in [(1, 2), (3, 0), (4, 1), (5, 2)]:
        p.set_pair(vertex(v), edge(e(v, w)))
    tri = {tuple(t): i for i, t in enumerate(m.triangles.tolist())}
    for (a, b), t in [((3, 4), (0, 3, 4)), ((0, 4), (0, 1, 4)), ((4, 5), (1, 4, 5)), ((1, 5), (1, 2, 5))]:
        p.set_pair(edge(e(a, b)), triangle(tri[t]))
    return m, p


def random_case(seed, n=10):
    m = grid_triangulation(n, n)
    f = VectorField(np.random.default_rng(seed).normal(size=(n * n, 2)))
    return m, f, process_outward_stars(m, f)


def test_strip_fixture():
    m, p = strip()
    assert validate_pairing(m, p).ok
    assert p.critical_counts() == (2, 1, 0)


def test_two_candidates_for_saddle():
    m, p = strip()
    f = VectorField(np.random.default_rng(0).normal(size=(6, 2)))
    queue, conn = follow_vpaths(p, m, f)
    sad = edge(m.edge_id(0, 1))
    assert {c.partner[1] for c in queue} == {vertex(0), vertex(2)}
    assert all(c.saddle == sad for c in queue)
    assert conn[sad] == {vertex(0), vertex(2)}


def test_no_saddles_empty_queue():
    m = grid_triangulation(3, 3)
    p = DiscretePairing.empty_for(m)
    p.set_critical(vertex(0))
    queue, conn = follow_vpaths(p, m, VectorField(np.zeros((9, 2))))
    assert queue == [] and conn == {}


def test_cancel_saddle_minimum():
    m, p = strip()
    sad = edge(m.edge_id(0, 1))
    path = trace_descending(p, m, sad)[1]  # 1 -> 2
    assert path.terminal == vertex(2)
    before = p.copy()
    assert reverse_pairs(p, path) is None
    assert not p.is_critical(sad) and not p.is_critical(vertex(2))
    assert p.critical_counts() == (1, 0, 0)
    assert validate_pairing(m, p).ok
    unreverse_pairs(p, path)
    assert p == before


def test_stale_path_rejected():
    m, p = strip()
    path = trace_descending(p, m, edge(m.edge_id(0, 1)))[1]
    reverse_pairs(p, path)
    with pytest.raises(StalePath):
        reverse_pairs(p, path)


def test_index1_cancellation():
    for seed in range(20):
        m, f, p = random_case(seed)
        tr = Tracer(m, p)
        for s in (c for c in p.critical if c.dim == 1):
            for path in tr.ascending(s):
                if path.endpoint is Endpoint.CRITICAL:
                    q = p.copy()
                    reverse_pairs(q, path)
                    assert not q.is_critical(s) and not q.is_critical(path.terminal)
                    c = p.critical_counts()
                    assert q.critical_counts() == (c[0], c[1] - 1, c[2] - 1)
                    unreverse_pairs(q, path)
                    assert q == p
                    return
    pytest.fail("no index-1 candidate found")


def side_orbit():
    """3x2 grid: saddle (0, 1) between minimum 0 and an orbit around triangle (1, 4, 5)."""
    m = grid_triangulation(3, 2)
    p = DiscretePairing.empty_for(m)
    e = m.edge_id
    tri = {tuple(t): i for i, t in enumerate(m.triangles.tolist())}
    p.set_critical(vertex(0))
    p.set_critical(edge(e(0, 1)))
    p.set_critical(triangle(tri[(1, 4, 5)]))
    for v, w in [(1, 5), (5, 4), (4, 1), (2, 1), (3, 0)]:
        p.set_pair(vertex(v), edge(e(v, w)))
    for (a, b), t in [((3, 4), (0, 3, 4)), ((0, 4), (0, 1, 4)), ((2, 5), (1, 2, 5))]:
        p.set_pair(edge(e(a, b)), triangle(tri[t]))
    return m, p


def test_orbit_cancellation_slides_saddle():
    m, p = side_orbit()
    assert validate_pairing(m, p).ok
    sad = edge(m.edge_id(0, 1))
    path = trace_descending(p, m, sad)[1]
    assert path.endpoint is Endpoint.ORBIT
    before_counts = p.critical_counts()
    assert len(exhaustive_vpath_audit(m, p)) == 1
    slid = reverse_pairs(p, path)
    assert slid == edge(m.edge_id(1, 4))
    assert p.is_critical(slid) and not p.is_critical(sad)
    assert p.critical_counts() == before_counts
    assert validate_pairing(m, p).ok
    assert len(exhaustive_vpath_audit(m, p)) == 0
    # both separatrices of the slid saddle now run down to vertex 0
    assert [q.terminal for q in trace_descending(p, m, slid)] == [vertex(0), vertex(0)]


def test_shared_orbit_is_not_cancelled():
    # both descending paths of the saddle enter the same orbit: sliding would
    # just close a new loop through the saddle, so the candidate is suppressed
    m, p = triangle_orbit()
    queue, _ = follow_vpaths(p, m, VectorField(np.zeros((4, 2))))
    assert not any(c.is_orbit for c in queue)


def test_multiplicity_guard():
    m = grid_triangulation(2, 2)
    p = DiscretePairing.empty_for(m)
    e = m.edge_id
    p.set_critical(vertex(0))
    p.set_critical(edge(e(0, 1)))
    p.set_pair(vertex(1), edge(e(1, 3)))
    p.set_pair(vertex(3), edge(e(0, 3)))
    p.set_pair(vertex(2), edge(e(0, 2)))
    p.set_pair(edge(e(2, 3)), triangle(1))
    p.set_critical(triangle(0))
    queue, _ = follow_vpaths(p, m, VectorField(np.ones((4, 2))))
    # both descending paths reach vertex 0, so only the index-1 candidate survives
    assert [c.partner for c in queue] == [(1, triangle(0))]


def test_noop_target():
    m, f, p = random_case(1)
    r = simplify_to(p, m, f, p.critical_counts()[1])
    assert r.curve == [] and r.reached and r.pairing == p
    assert weight_curve_csv(r.curve) == []


@pytest.mark.parametrize("seed", range(12))
def test_every_step_stays_valid(seed):
    m, f, p = random_case(seed, n=9)

    def check(q):
        rep = validate_pairing(m, q)
        assert rep.ok, rep.summary()

    r = simplify_to(p, m, f, 0, check=check)
    assert r.reached
    n = [row[0] for row in r.curve]
    assert n == sorted(n, reverse=True)
    assert all(c >= 0 for _, c in r.curve)
    assert p == process_outward_stars(m, f)  # input untouched


def test_deterministic():
    m, f, p = random_case(3, n=14)
    a = simplify_to(p, m, f, 2)
    b = simplify_to(p, m, f, 2)
    assert a.curve == b.curve and a.pairing == b.pairing


def test_max_cost_stops_early():
    m, f, p = random_case(4, n=12)
    full = simplify_to(p, m, f, 0)
    limit = sorted(c for _, c in full.curve)[len(full.curve) // 2]
    r = simplify_to(p, m, f, 0, max_cost=limit)
    assert not r.reached
    assert all(c <= limit for _, c in r.curve)


def test_unreached_target_warns(monkeypatch):
    m, f, p = random_case(5)
    monkeypatch.setattr(simp.SimplifyState, "pop_valid", lambda self: None)
    with pytest.warns(TargetUnreachable):
        r = simplify_to(p, m, f, 0)
    assert not r.reached and r.curve == []


def test_curve_csv_rows():
    assert weight_curve_csv([(5, 0.25)]) == ["num_criticals,cost", "5,0.25"]


def test_saddles_for_criticals():
    m = grid_triangulation(4, 4)
    assert saddles_for_criticals(m, 1) == 0
    assert saddles_for_criticals(m, 27) == 13
    with pytest.raises(ValueError):
        saddles_for_criticals(m, 2)
