"""Piecewise-linear critical points and the discrete/PL proximity experiment."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .field import as_vectors
from .mesh import SimplexRef, TriMesh2

logger = logging.getLogger(__name__)

KINDS = ("source-node", "sink-node", "saddle", "repelling-focus", "attracting-focus", "center")

BARY_EPS = 1e-12
DEDUP_TOL = 1e-9
DEGENERATE_DET = 1e-12
DEGENERATE_ANGLE_DEG = 1.0


@dataclass
class PLCriticalPoint:
    position: tuple[float, float]
    triangle: SimplexRef
    kind: str
    jacobian_det: float
    min_abs_eigenvalue: float
    eigvec_angle_deg: float
    degenerate: bool = False

    @property
    def is_saddle(self) -> bool:
        return self.kind == "saddle"


def _jacobians(mesh: TriMesh2, vec: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Per-triangle 2x2 Jacobian of the linear interpolant."""
    p = mesh.coords[mesh.triangles[tris]]
    f = vec[mesh.triangles[tris]]
    dP = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)   # columns = edges
    dF = np.stack([f[:, 1] - f[:, 0], f[:, 2] - f[:, 0]], axis=2)
    return dF @ np.linalg.inv(dP)


def classify_jacobian(A: np.ndarray, tol: float = 1e-12) -> tuple[str, float, float]:
    """Kind, min |eigenvalue| and eigenvector angle (degrees) of a 2x2 Jacobian.

    Real eigenvalues give nodes or a saddle; a complex pair gives a focus, or
    a center when the trace vanishes (relative to ``tol``).
    """
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = tr * tr - 4.0 * det
    scale = max(float(np.abs(A).max()), 1e-300)
    lam = np.linalg.eigvals(A)
    min_abs = float(np.abs(lam).min())
    if disc >= 0:
        if det < 0:
            kind = "saddle"
        elif tr > 0:
            kind = "source-node"
        else:
            kind = "sink-node"
        w, vecs = np.linalg.eig(A)
        v0, v1 = vecs[:, 0].real, vecs[:, 1].real
        c = abs(float(v0 @ v1)) / max(np.linalg.norm(v0) * np.linalg.norm(v1), 1e-300)
        angle = math.degrees(math.acos(min(1.0, c)))
    else:
        if abs(tr) <= tol * scale:
            kind = "center"
        elif tr > 0:
            kind = "repelling-focus"
        else:
            kind = "attracting-focus"
        angle = 90.0
    return kind, min_abs, angle


def _solve_barycentric(mesh: TriMesh2, vec: np.ndarray):
    """Barycentric coordinates of the zero of the interpolant in every triangle."""
    f = vec[mesh.triangles]                       # (T, 3, 2)
    M = np.empty((len(f), 3, 3))
    M[:, 0, :] = f[:, :, 0]
    M[:, 1, :] = f[:, :, 1]
    M[:, 2, :] = 1.0
    det = np.linalg.det(M)
    ok = det != 0.0
    lam = np.full((len(f), 3), np.nan)
    if ok.any():
        rhs = np.broadcast_to(np.array([0.0, 0.0, 1.0]), (int(ok.sum()), 3))
        lam[ok] = np.linalg.solve(M[ok], rhs[..., None])[..., 0]
    return lam, det


def _candidate_triangles(mesh: TriMesh2, vec: np.ndarray):
    lam, det = _solve_barycentric(mesh, vec)
    inside = (lam >= -BARY_EPS).all(axis=1) & (lam <= 1.0 + BARY_EPS).all(axis=1)
    return np.flatnonzero(inside), lam, det


def count_pl_critical_points(mesh: TriMesh2, field) -> int:
    """Number of PL zeros, deduplicated (cheap path used during smoothing)."""
    vec = as_vectors(field)
    tris, lam, _ = _candidate_triangles(mesh, vec)
    if len(tris) == 0:
        return 0
    pos = np.einsum("ti,tij->tj", lam[tris], mesh.coords[mesh.triangles[tris]])
    return len(_dedup(pos))


def _dedup(pos: np.ndarray) -> list[int]:
    """Indices kept after merging points closer than ``DEDUP_TOL``; lowest index wins."""
    if len(pos) == 0:
        return []
    nbrs: dict[int, list[int]] = {}
    for a, b in cKDTree(pos).query_pairs(DEDUP_TOL):
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    taken = np.zeros(len(pos), dtype=bool)
    keep = []
    for i in range(len(pos)):
        if taken[i]:
            continue
        keep.append(i)
        for j in nbrs.get(i, ()):
            taken[j] = True
    return keep


def pl_critical_points(mesh: TriMesh2, field) -> list[PLCriticalPoint]:
    """All zeros of the piecewise-linear interpolant, classified.

    A zero on a shared edge or vertex is reported once, attributed to the
    lowest-id triangle containing it. Triangles with a singular barycentric
    system (all three vectors collinear through the origin or parallel) are
    skipped.
    """
    vec = as_vectors(field)
    tris, lam, _ = _candidate_triangles(mesh, vec)
    if len(tris) == 0:
        return []
    pos = np.einsum("ti,tij->tj", lam[tris], mesh.coords[mesh.triangles[tris]])
    keep = _dedup(pos)  # tris ascending, so the first hit is the lowest id
    A = _jacobians(mesh, vec, tris[keep])
    out = []
    for k, i in enumerate(keep):
        J = A[k]
        kind, min_abs, angle = classify_jacobian(J)
        det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        out.append(PLCriticalPoint(
            position=(float(pos[i, 0]), float(pos[i, 1])),
            triangle=SimplexRef(2, int(tris[i])),
            kind=kind,
            jacobian_det=det,
            min_abs_eigenvalue=min_abs,
            eigvec_angle_deg=angle,
            degenerate=abs(det) < DEGENERATE_DET or angle < DEGENERATE_ANGLE_DEG,
        ))
    return out


# -- proximity experiment -------------------------------------------------------

LEVELS = ("L1", "L2", "L3", "L4")
LEVEL_DISTANCES = {"L3": 2.0, "L4": 3.0}


@dataclass
class ProximityResult:
    """Tightest level at which each PL point found a discrete partner (0 = none)."""

    level: list[int]

    def counts(self) -> list[int]:
        lv = np.asarray(self.level, dtype=np.int64)
        return [int(((lv >= 1) & (lv <= k)).sum()) for k in range(1, 5)]


def _compatible(kind: str, dim: int) -> bool:
    return dim == 1 if kind == "saddle" else dim in (0, 2)


def proximity_match(pl_cps: Sequence[PLCriticalPoint], pairing, mesh: TriMesh2) -> ProximityResult:
    """Match PL critical points to type-compatible critical simplices.

    Levels, each including the previous ones:

    1. a critical simplex that is a face of the containing triangle;
    2. one in the star of a vertex of that triangle;
    3. one whose barycenter is at most 2 units from the PL point;
    4. the same within 3 units.
    """
    crit = pairing.critical
    groups = {"saddle": [s for s in crit if s.dim == 1],
              "other": [s for s in crit if s.dim != 1]}
    by_vertex: dict[str, dict[int, list[tuple]]] = {}
    trees = {}
    for g, refs in groups.items():
        idx: dict[int, list[tuple]] = {}
        pts = []
        for s in refs:
            vs = mesh.vertices_of(s)
            for v in vs:
                idx.setdefault(v, []).append(vs)
            pts.append(mesh.coords[list(vs)].mean(axis=0))
        by_vertex[g] = idx
        trees[g] = cKDTree(np.array(pts)) if pts else None

    levels = []
    for cp in pl_cps:
        g = "saddle" if cp.is_saddle else "other"
        tri = set(int(v) for v in mesh.triangles[cp.triangle.id])
        touching = [vs for v in tri for vs in by_vertex[g].get(v, ())]
        if any(set(vs) <= tri for vs in touching):
            levels.append(1)
        elif touching:
            levels.append(2)
        elif trees[g] is None:
            levels.append(0)
        else:
            d, _ = trees[g].query(cp.position)
            levels.append(3 if d <= LEVEL_DISTANCES["L3"] else 4 if d <= LEVEL_DISTANCES["L4"] else 0)
    return ProximityResult(levels)


@dataclass
class ExperimentReport:
    rows: list[dict] = dc_field(default_factory=list)

    COLUMNS = ("field_seed", "pl_cps", "discrete_cps", "match_L1", "match_L2", "match_L3", "match_L4")

    def totals(self) -> dict:
        return {c: int(sum(r[c] for r in self.rows)) for c in self.COLUMNS[1:]}

    def rates(self) -> dict:
        t = self.totals()
        n = t["pl_cps"]
        return {lv: (t[f"match_{lv}"] / n if n else float("nan")) for lv in LEVELS}

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        lines += [",".join(str(r[c]) for c in self.COLUMNS) for r in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"num_fields": len(self.rows), "totals": self.totals(),
                           "rates": self.rates(),
                           "unreached_seeds": [r["field_seed"] for r in self.rows
                                               if not r.get("reached", True)]},
                          indent=2, sort_keys=True)


def experiment_row(field_seed: int, grid_size: int, target: int = 200, tolerance: int = 20) -> dict:
    """Generate one smoothed random field, build its pairing and match it."""
    from .assignment import process_outward_stars
    from .field import gen_random_smoothed

    sm = gen_random_smoothed(grid_size, grid_size, target, tolerance, rng_seed=field_seed)
    pairing = process_outward_stars(sm.mesh, sm.field)
    cps = pl_critical_points(sm.mesh, sm.field)
    counts = proximity_match(cps, pairing, sm.mesh).counts()
    row = {"field_seed": field_seed, "pl_cps": len(cps), "discrete_cps": pairing.n_critical,
           "reached": sm.reached}
    row.update({f"match_{lv}": c for lv, c in zip(LEVELS, counts)})
    return row


def run_proximity_experiment(num_fields: int, grid_size: int = 128, seed: int = 0,
                             target: int = 200, tolerance: int = 20) -> ExperimentReport:
    """Proximity statistics over ``num_fields`` random fields seeded ``seed, seed+1, ...``."""
    if num_fields < 1:
        raise ValueError("num_fields must be at least 1")
    report = ExperimentReport()
    for i in range(num_fields):
        row = experiment_row(seed + i, grid_size, target, tolerance)
        logger.info("seed %d: %d PL, %d discrete, L2=%d", row["field_seed"], row["pl_cps"],
                    row["discrete_cps"], row["match_L2"])
        report.rows.append(row)
    return report
