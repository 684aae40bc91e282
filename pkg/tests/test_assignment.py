import numpy as np
import pytest

from oracles import pairing_as_sets, reference_pairing
from dvfield.assignment import (DiscretePairing, compute_outward_stars, process_outward_stars,
                                process_single_star, unassigned_triangles)
from dvfield.field import VectorField
from dvfield.mesh import build_from_arrays, edge, grid_triangulation, triangle, vertex
from dvfield.validation import validate_pairing
from dvfield.weights import edge_flow


def hub(out_mask, strength=None):
    """Valence-6 hub; ring vertex i flows outward iff out_mask[i-1]."""
    ang = np.arange(6) * np.pi / 3
    ring = np.column_stack([np.cos(ang), np.sin(ang)])
    pts = np.vstack([[0, 0], ring])
    tris = [[0, i, i % 6 + 1] for i in range(1, 7)]
    s = np.ones(6) if strength is None else np.asarray(strength, float)
    vec = np.vstack([[0, 0], np.where(np.asarray(out_mask)[:, None], 1, -1) * ring * s[:, None]])
    return build_from_arrays(pts, tris), VectorField(vec)


def test_sink_star_is_critical_vertex():
    m, f = hub([0, 0, 0, 0, 0, 0])
    pairs, crit = process_single_star(m, f, 0)
    assert pairs == [] and crit == [vertex(0)]


def test_three_adjacent_edges_pair_fully():
    m, f = hub([1, 1, 1, 0, 0, 0], strength=[1, 3, 2, 1, 1, 1])
    pairs, crit = process_single_star(m, f, 0)
    assert crit == []
    assert pairs[0] == (vertex(0), edge(m.edge_id(0, 2)))  # steepest
    assert sorted(p[1].dim for p in pairs[1:]) == [2, 2]


def test_two_pairs_of_edges_leave_one_critical_edge():
    m, f = hub([1, 1, 0, 1, 1, 0], strength=[1, 2, 1, 3, 1.5, 1])
    pairs, crit = process_single_star(m, f, 0)
    assert pairs[0] == (vertex(0), edge(m.edge_id(0, 4)))
    assert sum(p[1].dim == 2 for p in pairs) == 2
    assert len(crit) == 1 and crit[0].dim == 1


def test_full_source_star_pairs_everything():
    m, f = hub([1] * 6, strength=[1, 2, 3, 4, 5, 6])
    pairs, crit = process_single_star(m, f, 0)
    # 1 vertex + 6 edges + 6 triangles: alternating sum 1, so one critical remains
    assert len(pairs) == 6
    assert len(crit) == 1


def test_zero_field_ties():
    m = grid_triangulation(6, 6)
    f = VectorField(np.zeros((36, 2)))
    stars = compute_outward_stars(m, f)
    assert (stars.winners == m.edges[:, 0]).all()
    p = process_outward_stars(m, f)
    assert validate_pairing(m, p).ok


def test_constant_field_has_no_unassigned_triangles():
    m = grid_triangulation(16, 16)
    f = VectorField(np.tile([0.3, 0.7], (m.n_vertices, 1)))
    assert unassigned_triangles(m, f) == set()


def test_rotation_leaves_circulating_triangle_unassigned():
    m = build_from_arrays([[0, 0], [2, 0], [1, 1.8]], [[0, 1, 2]])
    c = m.coords.mean(axis=0)
    d = m.coords - c
    f = VectorField(np.column_stack([-d[:, 1], d[:, 0]]))
    assert unassigned_triangles(m, f) == {triangle(0)}
    p = process_outward_stars(m, f)
    assert p.is_critical(triangle(0))


def test_unassigned_are_critical():
    rng = np.random.default_rng(11)
    m = grid_triangulation(12, 12)
    f = VectorField(rng.normal(size=(144, 2)))
    p = process_outward_stars(m, f)
    for t in unassigned_triangles(m, f):
        assert p.is_critical(t)


def test_single_star_merge_equals_driver():
    rng = np.random.default_rng(5)
    m = grid_triangulation(9, 7, diagonal_rule="alternate")
    f = VectorField(rng.normal(size=(63, 2)))
    full = process_outward_stars(m, f)
    merged = DiscretePairing.empty_for(m)
    for x in range(m.n_vertices):
        pairs, crit = process_single_star(m, f, x)
        for a, b in pairs:
            merged.set_pair(a, b)
        for s in crit:
            merged.set_critical(s)
    for t in unassigned_triangles(m, f):
        merged.set_critical(t)
    assert merged == full


def test_vertex_order_independence():
    rng = np.random.default_rng(6)
    m = grid_triangulation(10, 10)
    f = VectorField(rng.normal(size=(100, 2)))
    ref = process_outward_stars(m, f)
    for seed in range(3):
        order = np.random.default_rng(seed).permutation(100)
        assert process_outward_stars(m, f, vertex_order=order) == ref


def test_parallel_is_bit_identical():
    rng = np.random.default_rng(8)
    m = grid_triangulation(40, 30)
    f = VectorField(rng.normal(size=(1200, 2)))
    assert process_outward_stars(m, f, workers=3) == process_outward_stars(m, f)


def test_vertex_pairs_with_steepest_edge():
    rng = np.random.default_rng(9)
    m = grid_triangulation(10, 10)
    f = VectorField(rng.normal(size=(100, 2)))
    p = process_outward_stars(m, f)
    for x in range(100):
        e = int(p.vert_up[x])
        if e < 0:
            continue
        other = m.other_vertex(e, x)
        best = edge_flow(m, f, x, other)
        for e2 in m.vertex_edges(x):
            y = m.other_vertex(int(e2), x)
            assert best >= edge_flow(m, f, x, y) or edge_flow(m, f, x, y) <= 0


def test_leftovers_outside_all_stars_are_triangles():
    rng = np.random.default_rng(10)
    m = grid_triangulation(12, 12)
    f = VectorField(rng.normal(size=(144, 2)))
    stars = compute_outward_stars(m, f)
    p = process_outward_stars(m, f)
    # every edge has a winner, so only triangles can be left over
    assert (stars.winners >= 0).all()
    assert {s.dim for s in unassigned_triangles(m, f)} <= {2}
    assert validate_pairing(m, p).ok


@pytest.mark.parametrize("seed", range(10))
def test_matches_reference_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    m = grid_triangulation(7, 6, diagonal_rule=["/", "\\", "alternate"][seed % 3])
    vec = rng.normal(size=(42, 2)) if seed % 2 else rng.integers(-1, 2, (42, 2)).astype(float)
    assert pairing_as_sets(process_outward_stars(m, vec)) == reference_pairing(m, vec)


def test_pairing_copy_and_equality(grid8):
    rng = np.random.default_rng(12)
    p = process_outward_stars(grid8, rng.normal(size=(64, 2)))
    q = p.copy()
    assert q == p
    q.set_critical(vertex(0), not q.is_critical(vertex(0)))
    assert q != p
