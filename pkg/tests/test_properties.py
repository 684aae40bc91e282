"""Randomised invariants over small grids and Delaunay meshes."""

import warnings

import numpy as np
from hypothesis import HealthCheck, given, settings

from conftest import small_instances
from oracles import pairing_as_sets, reference_pairing

from dvfield.assignment import compute_outward_stars, process_outward_stars
from dvfield.errors import TargetUnreachable
from dvfield.field import VectorField
from dvfield.mesh import SimplexRef
from dvfield.simplify import reverse_pairs, simplify_to, unreverse_pairs
from dvfield.skeleton import Endpoint, Tracer, extract_skeleton
from dvfield.validation import brute_force_outward, exhaustive_vpath_audit, validate_pairing
from dvfield.weights import edge_flow

N = 1000
PROFILE = settings(max_examples=N, deadline=None,
                   suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])


@PROFILE
@given(small_instances())
def test_pairing_is_valid_and_satisfies_euler(inst):
    mesh, vec = inst
    p = process_outward_stars(mesh, VectorField(vec))
    rep = validate_pairing(mesh, p)
    assert rep.ok, rep.summary()
    c0, c1, c2 = p.critical_counts()
    assert c0 - c1 + c2 == mesh.euler_characteristic


@PROFILE
@given(small_instances())
def test_outward_stars_partition_and_close(inst):
    mesh, vec = inst
    s = compute_outward_stars(mesh, VectorField(vec))
    # every edge lies in exactly one star
    won = np.concatenate([s.edge_idx[s.edge_off[x]:s.edge_off[x + 1]]
                          for x in range(mesh.n_vertices)])
    assert sorted(won.tolist()) == list(range(mesh.n_edges))
    owned = s.tri_idx.tolist()
    assert len(owned) == len(set(owned))
    for x in range(mesh.n_vertices):
        edges = set(s.edge_idx[s.edge_off[x]:s.edge_off[x + 1]].tolist())
        for t in s.tri_idx[s.tri_off[x]:s.tri_off[x + 1]].tolist():
            assert x in mesh.triangles[t]
            at_x = {int(e) for e in mesh.tri_edges[t] if x in mesh.edges[e]}
            assert at_x <= edges


@PROFILE
@given(small_instances())
def test_edge_flow_antisymmetry(inst):
    mesh, vec = inst
    f = VectorField(vec)
    for a, b in mesh.edges.tolist():
        assert edge_flow(mesh, f, a, b) == -edge_flow(mesh, f, b, a)


@PROFILE
@given(small_instances())
def test_oracle_equivalence(inst):
    mesh, vec = inst
    f = VectorField(vec)
    s = compute_outward_stars(mesh, f)
    brute = brute_force_outward(mesh, f)
    for x in range(mesh.n_vertices):
        fast = {SimplexRef(0, x)}
        fast |= {SimplexRef(1, int(e)) for e in s.edge_idx[s.edge_off[x]:s.edge_off[x + 1]]}
        fast |= {SimplexRef(2, int(t)) for t in s.tri_idx[s.tri_off[x]:s.tri_off[x + 1]]}
        assert fast == brute[x]
    assert pairing_as_sets(process_outward_stars(mesh, f)) == reference_pairing(mesh, vec)


@PROFILE
@given(small_instances())
def test_skeleton_orbits_found_by_audit(inst):
    mesh, vec = inst
    f = VectorField(vec)
    p = process_outward_stars(mesh, f)
    sk = extract_skeleton(p, mesh, f)
    audit = exhaustive_vpath_audit(mesh, p)
    assert {(o.index, o.pairs) for o in sk.orbits} <= audit.as_set()
    for q in sk.separatrices:
        if q.endpoint is Endpoint.CRITICAL:
            assert p.is_critical(q.terminal)


@PROFILE
@given(small_instances())
def test_reversal_involution(inst):
    mesh, vec = inst
    f = VectorField(vec)
    p = process_outward_stars(mesh, f)
    tracer = Tracer(mesh, p)
    for saddle in [s for s in p.critical if s.dim == 1]:
        paths = tracer.all_paths(saddle)
        for q in paths:
            twins = [r for r in paths if r.index == q.index and r.partner_key == q.partner_key]
            if q.endpoint is not Endpoint.CRITICAL or len(twins) > 1:
                continue
            before = p.copy()
            c = p.critical_counts()
            reverse_pairs(p, q)
            after = p.critical_counts()
            assert after[1] == c[1] - 1
            assert after[0] + after[2] == c[0] + c[2] - 1
            assert validate_pairing(mesh, p).ok
            unreverse_pairs(p, q)
            assert p == before


@PROFILE
@given(small_instances())
def test_cancellation_keeps_pairing_valid(inst):
    mesh, vec = inst
    f = VectorField(vec)
    p = process_outward_stars(mesh, f)

    def check(q):
        rep = validate_pairing(mesh, q)
        assert rep.ok, rep.summary()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TargetUnreachable)
        res = simplify_to(p, mesh, f, 0, check=check)
    counts = [n for n, _ in res.curve]
    assert counts == sorted(counts, reverse=True)
    assert res.pairing.n_critical == (counts[-1] if counts else p.n_critical)
