"""File formats: legacy ASCII VTK, a small internal text mesh format, and CSV dumps.

Every float is written with 17 significant digits so a write/read round
trip reproduces the exact binary values.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable

import numpy as np

from .errors import MissingVectors, NonTriangleCells, ParseError
from .field import VectorField, as_vectors
from .mesh import SimplexRef, TriMesh2, build_from_arrays

FLOAT = "%.17g"
VTK_TRIANGLE = 5


def _rows(arr: np.ndarray, fmt: str) -> str:
    buf = io.StringIO()
    if len(arr):
        np.savetxt(buf, arr, fmt=fmt)
    return buf.getvalue()


# -- VTK writing ------------------------------------------------------------------

def write_vtk(path, mesh: TriMesh2, field=None, dataset: str = "UNSTRUCTURED_GRID",
              title: str = "dvfield mesh") -> None:
    """Write a triangle mesh (and optional point vectors) as legacy ASCII VTK.

    ``dataset`` is ``"UNSTRUCTURED_GRID"`` (cell type 5) or ``"POLYDATA"``
    (``POLYGONS``).
    """
    nv, nt = mesh.n_vertices, mesh.n_triangles
    pts = np.column_stack([mesh.coords, np.zeros(nv)])
    cells = np.column_stack([np.full(nt, 3), mesh.triangles])
    with open(path, "w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET {dataset}\n")
        fh.write(f"POINTS {nv} double\n")
        fh.write(_rows(pts, FLOAT))
        if dataset == "UNSTRUCTURED_GRID":
            fh.write(f"CELLS {nt} {4 * nt}\n")
            fh.write(_rows(cells, "%d"))
            fh.write(f"CELL_TYPES {nt}\n")
            fh.write(_rows(np.full((nt, 1), VTK_TRIANGLE), "%d"))
        elif dataset == "POLYDATA":
            fh.write(f"POLYGONS {nt} {4 * nt}\n")
            fh.write(_rows(cells, "%d"))
        else:
            raise ValueError(f"unsupported dataset {dataset!r}")
        if field is not None:
            vec = as_vectors(field)
            if len(vec) != nv:
                raise ValueError("field length does not match the mesh")
            fh.write(f"POINT_DATA {nv}\nVECTORS vectors double\n")
            fh.write(_rows(np.column_stack([vec, np.zeros(nv)]), FLOAT))


# -- VTK reading ------------------------------------------------------------------

class _Tokens:
    def __init__(self, text: str):
        self.tok = text.split()
        self.i = 0

    def done(self) -> bool:
        return self.i >= len(self.tok)

    def next(self) -> str:
        if self.done():
            raise ParseError("unexpected end of file")
        t = self.tok[self.i]
        self.i += 1
        return t

    def peek(self) -> str | None:
        return None if self.done() else self.tok[self.i]

    def int(self) -> int:
        t = self.next()
        try:
            return int(t)
        except ValueError:
            raise ParseError(f"expected integer, got {t!r}") from None

    def array(self, n: int, dtype) -> np.ndarray:
        if self.i + n > len(self.tok):
            raise ParseError("unexpected end of file inside a data block")
        chunk = self.tok[self.i:self.i + n]
        self.i += n
        try:
            return np.array(chunk, dtype=dtype)
        except ValueError as exc:
            raise ParseError(f"bad numeric data: {exc}") from None


def read_vtk(path) -> tuple[TriMesh2, VectorField | None]:
    """Read a triangle mesh written by :func:`write_vtk` or another VTK producer.

    Only triangle cells are accepted. Point ``VECTORS`` become the field
    (the z component is dropped); if there are none, the field is ``None``.
    """
    with open(path) as fh:
        text = fh.read()
    lines = text.split("\n", 3)
    if len(lines) < 4 or not lines[0].startswith("# vtk"):
        raise ParseError(f"{path}: not a legacy VTK file")
    if lines[2].strip().upper() != "ASCII":
        raise ParseError(f"{path}: only ASCII VTK is supported")
    tk = _Tokens(lines[3])
    coords = tris = vectors = None
    cell_types = None
    section = None
    n_point_data = None
    while not tk.done():
        kw = tk.next().upper()
        if kw == "DATASET":
            kind = tk.next().upper()
            if kind not in ("UNSTRUCTURED_GRID", "POLYDATA"):
                raise ParseError(f"unsupported dataset {kind}")
        elif kw == "POINTS":
            n = tk.int()
            tk.next()
            coords = tk.array(3 * n, np.float64).reshape(n, 3)
        elif kw in ("CELLS", "POLYGONS"):
            n, size = tk.int(), tk.int()
            raw = tk.array(size, np.int64)
            if size != 4 * n or not (raw[0::4] == 3).all():
                raise NonTriangleCells(f"{kw} block contains non-triangle cells")
            tris = raw.reshape(n, 4)[:, 1:]
        elif kw in ("VERTS", "LINES", "TRIANGLE_STRIPS"):
            raise NonTriangleCells(f"{kw} cells are not supported in mesh input")
        elif kw == "CELL_TYPES":
            n = tk.int()
            cell_types = tk.array(n, np.int64)
        elif kw == "POINT_DATA":
            n_point_data = tk.int()
            section = "point"
        elif kw == "CELL_DATA":
            m = tk.int()
            section = ("cell", m)
        elif kw in ("VECTORS", "NORMALS"):
            tk.next()
            tk.next()
            n = n_point_data if section == "point" else section[1]
            arr = tk.array(3 * n, np.float64).reshape(n, 3)
            if kw == "VECTORS" and section == "point" and vectors is None:
                vectors = arr[:, :2]
        elif kw == "SCALARS":
            tk.next()
            tk.next()
            ncomp = 1
            if tk.peek() is not None and tk.peek().isdigit():
                ncomp = tk.int()
            if tk.peek() and tk.peek().upper() == "LOOKUP_TABLE":
                tk.next()
                tk.next()
            n = n_point_data if section == "point" else section[1]
            tk.array(ncomp * n, np.float64)
        elif kw == "FIELD":
            tk.next()
            for _ in range(tk.int()):
                tk.next()
                ncomp, ntup = tk.int(), tk.int()
                tk.next()
                tk.array(ncomp * ntup, np.float64)
        elif kw == "METADATA":
            raise ParseError("VTK METADATA blocks are not supported")
        else:
            raise ParseError(f"unexpected keyword {kw!r}")
    if coords is None or tris is None:
        raise ParseError(f"{path}: missing POINTS or cells")
    if cell_types is not None and not (cell_types == VTK_TRIANGLE).all():
        raise NonTriangleCells("only VTK_TRIANGLE (type 5) cells are supported")
    mesh = build_from_arrays(coords[:, :2], tris)
    field = None
    if vectors is not None:
        if len(vectors) != mesh.n_vertices:
            raise ParseError("POINT_DATA size does not match POINTS")
        field = VectorField(vectors)
    return mesh, field


def read_mesh_and_field(path) -> tuple[TriMesh2, VectorField]:
    """Load an input dataset (VTK or internal text); vectors are required."""
    if str(path).endswith(".ntv"):
        return read_ntv(path)
    mesh, field = read_vtk(path)
    if field is None:
        raise MissingVectors(f"{path}: no point VECTORS found")
    return mesh, field


# -- internal text format ----------------------------------------------------------

def write_ntv(path, mesh: TriMesh2, field) -> None:
    """``ntv V T`` header, then ``x y u v`` per vertex and ``a b c`` per triangle."""
    vec = as_vectors(field)
    with open(path, "w") as fh:
        fh.write(f"ntv {mesh.n_vertices} {mesh.n_triangles}\n")
        fh.write(_rows(np.column_stack([mesh.coords, vec]), FLOAT))
        fh.write(_rows(mesh.triangles, "%d"))


def read_ntv(path) -> tuple[TriMesh2, VectorField]:
    with open(path) as fh:
        tk = _Tokens(fh.read())
    if tk.next() != "ntv":
        raise ParseError(f"{path}: missing 'ntv' header")
    nv, nt = tk.int(), tk.int()
    data = tk.array(4 * nv, np.float64).reshape(nv, 4)
    tris = tk.array(3 * nt, np.int64).reshape(nt, 3)
    if not tk.done():
        raise ParseError(f"{path}: trailing data")
    return build_from_arrays(data[:, :2], tris), VectorField(data[:, 2:])


# -- CSV dumps ----------------------------------------------------------------------

def write_field_csv(path, field) -> None:
    vec = as_vectors(field)
    with open(path, "w") as fh:
        fh.write("vid,u,v\n")
        fh.write(_rows(np.column_stack([np.arange(len(vec)), vec]), "%d,%.17g,%.17g"))


def read_field_csv(path) -> VectorField:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        rows.sort(key=lambda r: int(r["vid"]))
        vec = [(float(r["u"]), float(r["v"])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: bad field CSV ({exc})") from None
    if [int(r["vid"]) for r in rows] != list(range(len(rows))):
        raise ParseError(f"{path}: vertex ids must be 0..n-1")
    return VectorField(np.array(vec).reshape(-1, 2))


def pairing_rows(pairing) -> list[tuple]:
    """``(dim, id, partner_dim, partner_id, role)`` for every simplex in a pair or critical."""
    rows = []
    for lo, hi in pairing.pairs():
        rows.append((lo.dim, lo.id, hi.dim, hi.id, "tail"))
        rows.append((hi.dim, hi.id, lo.dim, lo.id, "head"))
    for s in pairing.critical:
        rows.append((s.dim, s.id, -1, -1, "critical"))
    rows.sort()
    return rows


def write_pairing_csv(path, pairing) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "id", "partner_dim", "partner_id", "role"])
        w.writerows(pairing_rows(pairing))


def read_pairing_csv(path, mesh: TriMesh2):
    from .assignment import DiscretePairing

    p = DiscretePairing.empty_for(mesh)
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            s = SimplexRef(int(r["dim"]), int(r["id"]))
            if r["role"] == "critical":
                p.set_critical(s)
            elif r["role"] == "tail":
                p.set_pair(s, SimplexRef(int(r["partner_dim"]), int(r["partner_id"])))
    return p


def write_edge_dump(path, table: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eid", "v0", "v1", "f", "winner"])
        for eid, a, b, f, win in table:
            w.writerow([eid, a, b, FLOAT % f, win])


def write_curve_csv(path, lines: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines or ["num_criticals,cost"]) + "\n")


# -- skeleton export ----------------------------------------------------------------

def _barycenter(mesh: TriMesh2, s: SimplexRef) -> np.ndarray:
    return mesh.coords[list(mesh.vertices_of(s))].mean(axis=0)


def write_criticals_vtk(path, skeleton, mesh: TriMesh2) -> None:
    """Critical simplices as ``VERTS`` at their barycenters."""
    refs = [s for s, _ in skeleton.criticals]
    n = len(refs)
    pts = np.array([_barycenter(mesh, s) for s in refs]).reshape(n, 2)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\ncritical simplices\nASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {n} double\n")
        fh.write(_rows(np.column_stack([pts, np.zeros(n)]), FLOAT))
        fh.write(f"VERTS {n} {2 * n}\n")
        fh.write(_rows(np.column_stack([np.ones(n, dtype=int), np.arange(n)]), "%d"))
        fh.write(f"POINT_DATA {n}\n")
        for name, vals in (("cp_index", [i for _, i in skeleton.criticals]),
                           ("simplex_dim", [s.dim for s in refs])):
            fh.write(f"SCALARS {name} int 1\nLOOKUP_TABLE default\n")
            fh.write(_rows(np.array(vals, dtype=int).reshape(-1, 1), "%d"))


def write_separatrices_vtk(path, skeleton, mesh: TriMesh2) -> None:
    """Separatrices and closed orbits as polylines through step barycenters.

    Cell data: ``sep_index`` (0 forward, 1 backward, -1 for orbits),
    ``weight`` and ``orbit_index`` (-1 for separatrices).
    """
    polylines, sep_index, weights, orbit_index = [], [], [], []
    for p in skeleton.separatrices:
        polylines.append([_barycenter(mesh, s) for s in p.steps])
        sep_index.append(p.index)
        weights.append(p.weight)
        orbit_index.append(-1)
    for o in skeleton.orbits:
        simp = o.simplices
        polylines.append([_barycenter(mesh, s) for s in simp + simp[:1]])
        sep_index.append(-1)
        weights.append(0.0)
        orbit_index.append(o.index)
    npts = sum(len(pl) for pl in polylines)
    ncell = len(polylines)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nseparatrices\nASCII\nDATASET POLYDATA\n")
        fh.write(f"POINTS {npts} double\n")
        pts = np.array([pt for pl in polylines for pt in pl]).reshape(npts, 2)
        fh.write(_rows(np.column_stack([pts, np.zeros(npts)]), FLOAT))
        fh.write(f"LINES {ncell} {ncell + npts}\n")
        k = 0
        for pl in polylines:
            fh.write(" ".join(map(str, [len(pl), *range(k, k + len(pl))])) + "\n")
            k += len(pl)
        fh.write(f"CELL_DATA {ncell}\n")
        fh.write("SCALARS sep_index int 1\nLOOKUP_TABLE default\n")
        fh.write(_rows(np.array(sep_index, dtype=int).reshape(-1, 1), "%d"))
        fh.write("SCALARS weight double 1\nLOOKUP_TABLE default\n")
        fh.write(_rows(np.array(weights, dtype=float).reshape(-1, 1), FLOAT))
        fh.write("SCALARS orbit_index int 1\nLOOKUP_TABLE default\n")
        fh.write(_rows(np.array(orbit_index, dtype=int).reshape(-1, 1), "%d"))


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
