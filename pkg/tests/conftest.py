import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.spatial import Delaunay

sys.path.insert(0, str(Path(__file__).parent))

from dvfield.mesh import build_from_arrays, grid_triangulation


@pytest.fixture
def grid8():
    return grid_triangulation(8, 8)


@pytest.fixture
def centered9():
    """9x9 unit grid centered on the origin (vertex 40 sits at (0, 0))."""
    return grid_triangulation(9, 9, origin=(-4.0, -4.0))


def delaunay_mesh(rng, n=25, scale=5.0):
    pts = rng.uniform(0.0, scale, size=(n, 2))
    return build_from_arrays(pts, Delaunay(pts).simplices)


@st.composite
def small_instances(draw, max_side=7):
    """A small mesh (grid or Delaunay) and a random field, ties included."""
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if draw(st.booleans()):
        nx = draw(st.integers(2, max_side))
        ny = draw(st.integers(2, max_side))
        rule = draw(st.sampled_from(["/", "\\", "alternate"]))
        mesh = grid_triangulation(nx, ny, diagonal_rule=rule)
    else:
        mesh = delaunay_mesh(rng, n=draw(st.integers(4, 30)))
    kind = draw(st.sampled_from(["normal", "integer", "zero"]))
    if kind == "normal":
        vec = rng.normal(size=(mesh.n_vertices, 2))
    elif kind == "integer":
        vec = rng.integers(-1, 2, size=(mesh.n_vertices, 2)).astype(float)
    else:
        vec = np.zeros((mesh.n_vertices, 2))
    return mesh, vec


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
