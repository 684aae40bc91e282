"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``RESULTS`` and echoed in the terminal summary
(see ``conftest.py``), so they show up without ``-s``.
"""

import time
import warnings

import numpy as np
import pytest

from dvfield.assignment import process_outward_stars
from dvfield.cli import bench_rows
from dvfield.errors import TargetUnreachable
from dvfield.field import add_uniform_noise, changes_mesh, cosine_mesh, gen_changes, gen_cosine
from dvfield.plcp import pl_critical_points, proximity_match, run_proximity_experiment
from dvfield.simplify import saddles_for_criticals, simplify_to
from dvfield.validation import validate_pairing

pytestmark = pytest.mark.slow

RESULTS: list[str] = []


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def interior(mesh, s):
    return not any(mesh.boundary_vertex[v] for v in mesh.vertices_of(s))


@pytest.fixture(scope="module")
def changes():
    mesh = changes_mesh()
    field = gen_changes(mesh)
    return mesh, field, pl_critical_points(mesh, field)


def test_c1_changes(changes):
    mesh, field, cps = changes
    t = time.perf_counter()
    p = process_outward_stars(mesh, gen_changes(mesh), workers=1)
    wall = time.perf_counter() - t
    n = p.n_critical
    n_int = sum(interior(mesh, s) for s in p.critical)
    levels = proximity_match(cps, p, mesh).level
    matched = sum(1 <= lv <= 2 for lv in levels)
    ok = (abs(n - 27) <= 3 and n_int >= 17 and len(cps) == 18 and matched == 18
          and wall < 30 and validate_pairing(mesh, p).ok)
    assert report("C1 changes", ok,
                  f"criticals={n} (27+-3) interior={n_int} (>=17) pl_cps={len(cps)} "
                  f"matched_L2={matched}/18 assignment={wall:.2f}s (<30s)")


def test_c2_cosine():
    mesh = cosine_mesh()
    field = gen_cosine(mesh)
    p = process_outward_stars(mesh, field)
    n = p.n_critical
    res = simplify_to(p, mesh, field, saddles_for_criticals(mesh, 1))
    valid = validate_pairing(mesh, res.pairing).ok
    ok = abs(n - 37) <= 5 and res.reached and res.pairing.n_critical == 1 and valid
    assert report("C2 cosine", ok,
                  f"criticals={n} (37+-5) simplified_to={res.pairing.n_critical} "
                  f"reached={res.reached} valid={valid}")


def test_c3_proximity():
    rep = run_proximity_experiment(20, 128, seed=0, target=200, tolerance=20)
    rates = rep.rates()
    again = run_proximity_experiment(2, 128, seed=0, target=200, tolerance=20)
    repro = again.to_csv().splitlines()[1:] == rep.to_csv().splitlines()[1:3]
    r = [rates[k] for k in ("L1", "L2", "L3", "L4")]
    ok = r[1] >= 0.95 and r == sorted(r) and repro
    assert report("C3 proximity", ok,
                  "rates " + " ".join(f"{k}={v:.4f}" for k, v in zip(("L1", "L2", "L3", "L4"), r))
                  + f" (L2>=0.95) reproducible={repro}")


def test_c4_noise_robust(changes):
    mesh, clean, cps = changes
    noisy = add_uniform_noise(clean, 0.3, 0)
    p = process_outward_stars(mesh, noisy)
    target = saddles_for_criticals(mesh, 27)
    res = simplify_to(p, mesh, noisy, target)
    levels = proximity_match(cps, res.pairing, mesh).level
    near = sum(1 <= lv <= 3 for lv in levels)
    within3 = sum(1 <= lv <= 4 for lv in levels)
    # the full curve continues past 27; its prefix is the run above
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TargetUnreachable)
        full = simplify_to(p, mesh, noisy, 0).curve
    k = len(res.curve)
    assert full[:k] == res.curve
    noise_max = max(c for _, c in full[:k])
    feature = full[k][1] if k < len(full) else float("nan")
    jump = feature / noise_max
    ok = res.reached and res.pairing.n_critical == 27 and near == 18 and jump >= 10
    assert report("C4 noisy changes", ok,
                  f"initial={p.n_critical} final={res.pairing.n_critical} within_L3={near}/18 "
                  f"within_L4={within3}/18 "
                  f"max_noise_cost={noise_max:.3g} first_feature_cost={feature:.3g} "
                  f"jump={jump:.1f}x (>=10x)")


def test_c5_linearity():
    sizes = [64, 128, 256, 512]
    rows = bench_rows(sizes, workers=1, simplify=False, repeat=3)
    steps = []
    for a, b in zip(rows, rows[1:]):
        steps.append((b["simplices"] / a["simplices"], b["assignment"] / a["assignment"]))
    worst = max(t for _, t in steps)
    mesh = changes_mesh(128)
    field = gen_changes(mesh)
    same = process_outward_stars(mesh, field, workers=4) == process_outward_stars(mesh, field)
    ok = worst <= 2.6 and same
    detail = " ".join(f"x{s:.2f}->{t:.2f}x" for s, t in steps)
    # same growth expressed per doubling of the simplex count, for reference
    per_doubling = max(t ** (np.log(2) / np.log(s)) for s, t in steps)
    assert report("C5 linearity", ok,
                  f"assignment time per size step {detail} (<=2.6x per ~4x simplices) "
                  f"worst_per_doubling={per_doubling:.2f}x parallel4_identical={same}")


def test_c6_property_suites():
    # the suites themselves live in test_properties.py; run them in-process here
    # so the gate has a single verdict line
    rc = pytest.main(["-q", "-p", "no:cacheprovider", __file__.replace(
        "test_acceptance.py", "test_properties.py")])
    assert report("C6 property suites", rc == 0, f"1000 examples per property, exit={int(rc)}")
