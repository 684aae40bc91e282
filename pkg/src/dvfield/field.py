"""Per-vertex vector data and the analytic / random dataset generators."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import FieldError, InvalidDimensions, TargetUnreachable
from .mesh import SimplexRef, TriMesh2, grid_triangulation

logger = logging.getLogger(__name__)


class VectorField:
    """Vectors ``(u, v)`` stored at mesh vertices, indexed by vertex id."""

    __slots__ = ("vectors",)

    def __init__(self, vectors):
        vec = np.array(vectors, dtype=np.float64, copy=True)
        if vec.ndim != 2 or vec.shape[1] not in (2, 3):
            raise FieldError(f"expected (V, 2) vectors, got shape {vec.shape}")
        vec = np.ascontiguousarray(vec[:, :2])
        if not np.isfinite(vec).all():
            raise FieldError("vector field contains NaN or Inf")
        vec.setflags(write=False)
        self.vectors = vec

    def __len__(self) -> int:
        return len(self.vectors)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.vectors + as_vectors(other))

    def __neg__(self) -> "VectorField":
        return VectorField(-self.vectors)

    def __mul__(self, k: float) -> "VectorField":
        return VectorField(self.vectors * k)

    __rmul__ = __mul__

    def check_aligned(self, mesh: TriMesh2) -> None:
        if len(self) != mesh.n_vertices:
            raise FieldError(
                f"field has {len(self)} vectors but mesh has {mesh.n_vertices} vertices")

    def __repr__(self) -> str:
        return f"VectorField(n={len(self)})"


def as_vectors(field) -> np.ndarray:
    """Raw ``(V, 2)`` array from a :class:`VectorField` or array-like."""
    if isinstance(field, VectorField):
        return field.vectors
    return np.asarray(field, dtype=np.float64)


def barycenter(mesh: TriMesh2, s: SimplexRef) -> np.ndarray:
    return mesh.coords[list(mesh.vertices_of(s))].mean(axis=0)


def field_at_barycenter(mesh: TriMesh2, field, s: SimplexRef) -> np.ndarray:
    """Linear interpolation of the field at the barycenter of ``s``."""
    return as_vectors(field)[list(mesh.vertices_of(s))].mean(axis=0)


# -- analytic datasets ------------------------------------------------------

def changes_field(x, y):
    """Three-region blend of an incompressible and an irrotational flow.

    Left of x=100 the flow is ``(sin a(y), cos b(x))``; right of x=200 it is
    the same vector rotated by 90 degrees; in between the rotation angle
    ramps linearly with x.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    s = np.sin(0.07 * (y + 15.0))
    c = np.cos(0.035 * (x - 17.5))
    theta = np.where(x < 100.0, 0.0,
                     np.where(x < 200.0, (x - 100.0) / 100.0 * (math.pi / 2), math.pi / 2))
    u = np.cos(theta) * s - np.sin(theta) * c
    v = np.sin(theta) * s + np.cos(theta) * c
    # exact forms on the two outer branches
    right = x >= 200.0
    u = np.where(right, -c, u)
    v = np.where(right, s, v)
    return np.column_stack([np.atleast_1d(u), np.atleast_1d(v)])


def cosine_field(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r = np.sqrt(x * x + y * y)
    return 50.0 * np.column_stack([np.atleast_1d(np.cos(0.06 * r)),
                                   np.atleast_1d(np.cos(0.001 * x * y))])


def gen_changes(mesh: TriMesh2) -> VectorField:
    xy = mesh.coords
    return VectorField(changes_field(xy[:, 0], xy[:, 1]))


def gen_cosine(mesh: TriMesh2) -> VectorField:
    xy = mesh.coords
    return VectorField(cosine_field(xy[:, 0], xy[:, 1]))


def changes_mesh(n: int = 300, diagonal_rule: str = "/") -> TriMesh2:
    """Unit grid with ``n`` samples per axis starting at the origin."""
    return grid_triangulation(n, n, origin=(0.0, 0.0), spacing=1.0, diagonal_rule=diagonal_rule)


def cosine_mesh(half_width: int = 120, diagonal_rule: str = "/") -> TriMesh2:
    n = 2 * half_width + 1
    return grid_triangulation(n, n, origin=(-half_width, -half_width), spacing=1.0,
                              diagonal_rule=diagonal_rule)


def add_uniform_noise(field, amplitude: float, rng_seed: int) -> VectorField:
    """Perturb every component by an independent draw from ``U[-a, a]``.

    Uses numpy's PCG64 generator so a seed gives the same field everywhere.
    """
    if amplitude < 0:
        raise FieldError("noise amplitude must be non-negative")
    vec = as_vectors(field)
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    noise = rng.uniform(-amplitude, amplitude, size=vec.shape)
    return VectorField(vec + noise)


# -- random smoothed fields --------------------------------------------------

@dataclass
class SmoothedField:
    field: VectorField
    mesh: TriMesh2
    passes: int
    pl_cp_count: int
    reached: bool


def _blur(img: np.ndarray) -> np.ndarray:
    return gaussian_filter(img, sigma=1.0, truncate=3.0, mode="nearest")


def gen_random_smoothed(nx: int, ny: int, target_pl_cp_count: int = 200,
                        tolerance: int = 20, rng_seed: int = 0,
                        max_passes: int = 10_000, mesh: TriMesh2 | None = None) -> SmoothedField:
    """Uniform noise in ``[-1, 1]^2`` blurred until it has about ``target`` PL zeros.

    A sigma=1 Gaussian (truncated at 3 sigma) is applied repeatedly, and the
    piecewise-linear critical points are recounted after every pass.
    Iteration stops as soon as the count lands in ``target +- tolerance``.
    If a pass overshoots below the window, the previous field is returned
    with ``reached=False`` and a :class:`TargetUnreachable` warning.
    """
    from .plcp import count_pl_critical_points

    if nx < 8 or ny < 8:
        raise InvalidDimensions("random fields need at least 8x8 vertices")
    if mesh is None:
        mesh = grid_triangulation(nx, ny)
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    u = rng.uniform(-1.0, 1.0, size=(ny, nx))
    v = rng.uniform(-1.0, 1.0, size=(ny, nx))
    lo, hi = target_pl_cp_count - tolerance, target_pl_cp_count + tolerance

    def pack(u, v):
        return VectorField(np.column_stack([u.ravel(), v.ravel()]))

    field = pack(u, v)
    count = count_pl_critical_points(mesh, field)
    passes = 0
    while passes < max_passes:
        if lo <= count <= hi:
            return SmoothedField(field, mesh, passes, count, True)
        u2, v2 = _blur(u), _blur(v)
        field2 = pack(u2, v2)
        count2 = count_pl_critical_points(mesh, field2)
        passes += 1
        if count2 < lo:
            warnings.warn(
                f"seed {rng_seed}: PL count jumped from {count} to {count2}, "
                f"missing [{lo}, {hi}]", TargetUnreachable, stacklevel=2)
            return SmoothedField(field, mesh, passes - 1, count, False)
        u, v, field, count = u2, v2, field2, count2
    reached = lo <= count <= hi
    if not reached:  # pass budget exhausted
        warnings.warn(f"seed {rng_seed}: no pass within [{lo}, {hi}]",
                      TargetUnreachable, stacklevel=2)
    return SmoothedField(field, mesh, passes, count, reached)
