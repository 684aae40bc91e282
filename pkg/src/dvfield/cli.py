"""Command-line interface: ``dvfield <subcommand> ...``.

Exit codes: 0 success, 2 bad input, 3 simplification target not reached.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings

import numpy as np

from . import io as dio
from .assignment import compute_outward_stars, default_workers, process_outward_stars
from .errors import BadDomain, DVFError, TargetUnreachable, UnknownGenerator
from .field import (VectorField, add_uniform_noise, changes_field, changes_mesh, cosine_mesh,
                    gen_changes, gen_cosine, gen_random_smoothed)
from .mesh import grid_triangulation
from .plcp import pl_critical_points, run_proximity_experiment
from .simplify import saddles_for_criticals, simplify_to, weight_curve_csv
from .skeleton import extract_skeleton
from .weights import edge_flow_table

logger = logging.getLogger("dvfield")

EXIT_OK, EXIT_INPUT, EXIT_UNREACHED = 0, 2, 3
GENERATORS = ("changes", "cosine", "random")


# -- datasets ----------------------------------------------------------------------

def make_dataset(name: str, size: int | None = None, seed: int = 0, noise: float = 0.0,
                 diagonal: str = "/", target_pl: int = 200):
    """Mesh and field for a named generator."""
    if name not in GENERATORS:
        raise UnknownGenerator(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
    if size is not None and size < 2:
        raise BadDomain("grid size must be at least 2")
    if name == "changes":
        mesh = changes_mesh(size or 300, diagonal)
        field = gen_changes(mesh)
    elif name == "cosine":
        if size is not None and size % 2 == 0:
            raise BadDomain("cosine grid size must be odd (symmetric about the origin)")
        mesh = cosine_mesh(((size or 241) - 1) // 2, diagonal)
        field = gen_cosine(mesh)
    else:
        n = size or 128
        if n < 8:
            raise BadDomain("random fields need at least 8x8 vertices")
        sm = gen_random_smoothed(n, n, target_pl, rng_seed=seed,
                                 mesh=grid_triangulation(n, n, diagonal_rule=diagonal))
        mesh, field = sm.mesh, sm.field
    if noise > 0:
        field = add_uniform_noise(field, noise, seed)
    return mesh, field


def load_input(source: str):
    """A file path, or ``gen:NAME[:SEED]`` for an in-memory generator."""
    if source.startswith("gen:"):
        parts = source.split(":")
        seed = int(parts[2]) if len(parts) > 2 else 0
        return make_dataset(parts[1], seed=seed)
    if not os.path.exists(source):
        raise FileNotFoundError(source)
    return dio.read_mesh_and_field(source)


# -- subcommands --------------------------------------------------------------------

def _summary(pairing, skeleton, mesh, timings: dict) -> dict:
    c = pairing.critical_counts()
    return {"criticals": {"index0": c[0], "index1": c[1], "index2": c[2], "total": sum(c)},
            "euler_characteristic": mesh.euler_characteristic,
            "euler_ok": c[0] - c[1] + c[2] == mesh.euler_characteristic,
            "orbits": len(skeleton.orbits) if skeleton is not None else None,
            "separatrices": len(skeleton.separatrices) if skeleton is not None else None,
            "n_simplices": mesh.n_simplices,
            "wall_time_s": timings}


def _export(out_dir, pairing, skeleton, mesh, summary, edge_table=None):
    dio.ensure_dir(out_dir)
    dio.write_criticals_vtk(os.path.join(out_dir, "criticals.vtk"), skeleton, mesh)
    dio.write_separatrices_vtk(os.path.join(out_dir, "separatrices.vtk"), skeleton, mesh)
    dio.write_pairing_csv(os.path.join(out_dir, "pairing.csv"), pairing)
    if edge_table is not None:
        dio.write_edge_dump(os.path.join(out_dir, "edges.csv"), edge_table)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)


def cmd_generate(args) -> int:
    mesh, field = make_dataset(args.name, args.size, args.seed, args.noise, args.diagonal)
    if args.out.endswith(".ntv"):
        dio.write_ntv(args.out, mesh, field)
    else:
        dio.write_vtk(args.out, mesh, field, dataset=args.dataset)
    logger.info("wrote %d vertices / %d triangles to %s", mesh.n_vertices, mesh.n_triangles, args.out)
    return EXIT_OK


def _compute(args):
    t0 = time.perf_counter()
    mesh, field = load_input(args.input)
    t1 = time.perf_counter()
    pairing = process_outward_stars(mesh, field, workers=args.threads)
    t2 = time.perf_counter()
    return mesh, field, pairing, {"load": t1 - t0, "assignment": t2 - t1}


def cmd_compute(args) -> int:
    mesh, field, pairing, timings = _compute(args)
    t = time.perf_counter()
    skel = extract_skeleton(pairing, mesh, field)
    timings["skeleton"] = time.perf_counter() - t
    summary = _summary(pairing, skel, mesh, timings)
    _export(args.out_dir, pairing, skel, mesh, summary,
            edge_flow_table(mesh, field) if args.edge_dump else None)
    print(json.dumps(summary["criticals"]))
    return EXIT_OK


def cmd_skeleton(args) -> int:
    mesh, field, pairing, timings = _compute(args)
    skel = extract_skeleton(pairing, mesh, field)
    dio.ensure_dir(args.out_dir)
    dio.write_criticals_vtk(os.path.join(args.out_dir, "criticals.vtk"), skel, mesh)
    dio.write_separatrices_vtk(os.path.join(args.out_dir, "separatrices.vtk"), skel, mesh)
    print(json.dumps({"separatrices": len(skel.separatrices), "orbits": len(skel.orbits)}))
    return EXIT_OK


def cmd_simplify(args) -> int:
    mesh, field, pairing, timings = _compute(args)
    if args.target_criticals is not None:
        try:
            target = saddles_for_criticals(mesh, args.target_criticals)
        except ValueError as exc:
            raise BadDomain(str(exc)) from None
    else:
        target = args.target_saddles
    t = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TargetUnreachable)
        res = simplify_to(pairing, mesh, field, target, max_cost=args.max_cost)
    timings["simplify"] = time.perf_counter() - t
    skel = extract_skeleton(res.pairing, mesh, field)
    summary = _summary(res.pairing, skel, mesh, timings)
    summary["cancellations"] = len(res.curve)
    summary["target_saddles"] = target
    summary["reached"] = res.reached
    _export(args.out_dir, res.pairing, skel, mesh, summary)
    curve_path = args.curve_out or os.path.join(args.out_dir, "weight_curve.csv")
    dio.write_curve_csv(curve_path, weight_curve_csv(res.curve))
    print(json.dumps(summary["criticals"]))
    if not res.reached:
        logger.error("target of %d saddles not reached (%d remain)", target,
                     summary["criticals"]["index1"])
        return EXIT_UNREACHED
    return EXIT_OK


def cmd_pl_cps(args) -> int:
    mesh, field = load_input(args.input)
    cps = pl_critical_points(mesh, field)
    lines = ["x,y,triangle,kind,jacobian_det,min_abs_eigenvalue,eigvec_angle_deg,degenerate"]
    for c in cps:
        lines.append(f"{c.position[0]:.17g},{c.position[1]:.17g},{c.triangle.id},{c.kind},"
                     f"{c.jacobian_det:.17g},{c.min_abs_eigenvalue:.17g},"
                     f"{c.eigvec_angle_deg:.17g},{int(c.degenerate)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_proximity(args) -> int:
    if args.num_fields < 1:
        raise BadDomain("--num-fields must be at least 1")
    rep = run_proximity_experiment(args.num_fields, args.grid_size, args.seed, args.target_pl)
    if args.out_csv:
        with open(args.out_csv, "w") as fh:
            fh.write(rep.to_csv())
    if args.out_json:
        with open(args.out_json, "w") as fh:
            fh.write(rep.to_json())
    print(rep.to_json())
    return EXIT_OK


# -- benchmark ----------------------------------------------------------------------

def bench_field(mesh, n: int) -> VectorField:
    """The Changes flow rescaled so every grid size shows the same features."""
    xy = mesh.coords * (300.0 / n)
    return VectorField(changes_field(xy[:, 0], xy[:, 1]))


def bench_rows(sizes, workers: int = 1, simplify: bool = True, repeat: int = 1) -> list[dict]:
    """Per-phase wall time for each ``n x n`` grid (best of ``repeat``)."""
    rows = []
    for n in sizes:
        best = None
        for _ in range(repeat):
            ph = {}
            t = time.perf_counter()
            mesh = grid_triangulation(n, n)
            field = bench_field(mesh, n)
            ph["load"] = time.perf_counter() - t
            t = time.perf_counter()
            stars = compute_outward_stars(mesh, field)
            ph["outward_stars"] = time.perf_counter() - t
            t = time.perf_counter()
            pairing = process_outward_stars(mesh, field, workers=workers, stars=stars)
            ph["assignment"] = time.perf_counter() - t
            t = time.perf_counter()
            extract_skeleton(pairing, mesh, field)
            ph["skeleton"] = time.perf_counter() - t
            t = time.perf_counter()
            if simplify:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", TargetUnreachable)
                    simplify_to(pairing, mesh, field, 0)
            ph["simplify"] = time.perf_counter() - t
            if best is None or ph["assignment"] < best["assignment"]:
                best = ph
        rows.append({"n": n, "simplices": mesh.n_simplices,
                     "criticals": pairing.n_critical, **best})
    return rows


BENCH_COLUMNS = ("n", "simplices", "criticals", "load", "outward_stars", "assignment",
                 "skeleton", "simplify")


def cmd_bench(args) -> int:
    rows = bench_rows(args.sizes, args.threads, not args.no_simplify, args.repeat)
    lines = [",".join(BENCH_COLUMNS)]
    for r in rows:
        lines.append(",".join(str(r[c]) if c in ("n", "simplices", "criticals")
                              else f"{r[c]:.6f}" for c in BENCH_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dvfield", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an analytic or random dataset")
    g.add_argument("name", help="changes | cosine | random")
    g.add_argument("-o", "--out", required=True, help="output .vtk (or .ntv) path")
    g.add_argument("--size", type=int, help="vertices per side")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", type=float, default=0.0, help="uniform noise amplitude")
    g.add_argument("--diagonal", default="/", choices=["/", "\\", "alternate"])
    g.add_argument("--dataset", default="UNSTRUCTURED_GRID", choices=["UNSTRUCTURED_GRID", "POLYDATA"])
    g.set_defaults(func=cmd_generate)

    def with_input(sp, out_dir=True):
        sp.add_argument("input", help="VTK/.ntv file or gen:NAME[:SEED]")
        if out_dir:
            sp.add_argument("-o", "--out-dir", default="dvfield_out")
        sp.add_argument("--threads", type=int, default=default_workers(),
                        help="assignment worker processes (default: $DVF_THREADS or 1)")

    c = sub.add_parser("compute", help="discrete vector field, skeleton and summary")
    with_input(c)
    c.add_argument("--edge-dump", action="store_true", help="also write per-edge flows")
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("simplify", help="weight-ranked saddle cancellation")
    with_input(s)
    tgt = s.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--target-saddles", type=int)
    tgt.add_argument("--target-criticals", type=int)
    s.add_argument("--max-cost", type=float)
    s.add_argument("--curve-out")
    s.set_defaults(func=cmd_simplify)

    k = sub.add_parser("skeleton", help="export critical simplices and separatrices")
    with_input(k)
    k.set_defaults(func=cmd_skeleton)

    pl = sub.add_parser("pl-cps", help="piecewise-linear critical points as CSV")
    pl.add_argument("input")
    pl.add_argument("-o", "--out")
    pl.set_defaults(func=cmd_pl_cps)

    px = sub.add_parser("proximity", help="discrete vs PL proximity experiment")
    px.add_argument("--num-fields", type=int, default=20)
    px.add_argument("--grid-size", type=int, default=128)
    px.add_argument("--seed", type=int, default=0)
    px.add_argument("--target-pl", type=int, default=200)
    px.add_argument("--out-csv")
    px.add_argument("--out-json")
    px.set_defaults(func=cmd_proximity)

    b = sub.add_parser("bench", help="per-phase timings over growing grids")
    b.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    b.add_argument("--threads", type=int, default=default_workers())
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--no-simplify", action="store_true")
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DVFError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
