"""Batch experiment runner and verification harness.

Every subcommand is deterministic for a fixed seed: replica work is cut
into fixed-size chunks, each chunk draws from its own keyed stream, and
results are reassembled in chunk order, so the thread count never
changes a byte of output.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .corpus import builtin_corpus
from .curvature import (average_curvature, curvature_report,
                        dual_degree_identity, omega_dagger_identity,
                        total_curvature_exact)
from .errors import ConfigError, IdentityFailure, MapError
from .forests import (dual_forest, forest_degree_samples, is_spanning_tree,
                      wilson_ust)
from .generators import GeneratedMap, generate, parse_gen, parse_gen_toml
from .local_limits import bs_sample, mtp_check
from .map_core import Map, dual, map_to_json
from .percolation import percolation_sweep
from .rng import stream
from .walks import srw

_CHUNK = 64


def _die(msg: str) -> "NoReturn":
    raise ConfigError(msg)


def _load_generated(args) -> GeneratedMap:
    if getattr(args, "gen_toml", None):
        try:
            with open(args.gen_toml, "r", encoding="utf-8") as fh:
                spec = parse_gen_toml(fh.read())
        except OSError:
            raise
    elif getattr(args, "gen", None):
        spec = parse_gen(args.gen)
    else:
        _die("a generator is required (--gen or --gen-toml)")
    return generate(spec, stream(args.seed, "generate", 0))


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _emit(args, header, rows) -> None:
    """Write a table as CSV, or as a JSON row list behind --json."""
    if args.json:
        body = [dict(zip(header, row)) for row in rows]
        text = json.dumps({"rows": body}, indent=2, sort_keys=True,
                          default=float) + "\n"
    else:
        lines = [",".join(header)]
        lines += [",".join(_fmt(x) for x in row) for row in rows]
        text = "\n".join(lines) + "\n"
    _write(args, text)


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _chunks(replicas: int):
    return [(ci, min(_CHUNK, replicas - ci * _CHUNK))
            for ci in range((replicas + _CHUNK - 1) // _CHUNK)]


def _run_chunks(work, replicas: int, threads: int) -> list:
    """work(chunk_index, chunk_size) -> result; order-stable assembly."""
    jobs = _chunks(replicas)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        return list(ex.map(lambda t: work(*t), jobs))


# -- subcommands ---------------------------------------------------------


def _cmd_gen(args) -> None:
    g = _load_generated(args)
    _write(args, map_to_json(g.map, g.root_dart) + "\n")


def _cmd_stats(args) -> None:
    g = _load_generated(args)
    rep = curvature_report(g.map)
    if args.json:
        m = g.map
        doc = {
            "family": g.family, "V": m.n_vertices, "E": m.n_edges,
            "F": m.n_faces, "genus": m.genus,
            "total_kappa": rep.total_kappa,
            "average_kappa": rep.average_kappa,
            "vertices": [
                {"vertex_id": v, "degree": int(m.degree(v)),
                 "theta": float(rep.theta[v]), "kappa": float(rep.kappa[v])}
                for v in range(m.n_vertices)],
        }
        _write(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        _write(args, rep.to_csv(g.map))


def _degree_table(args, flavor: str, boundary, root_vertices, purpose: str):
    g = _load_generated(args)
    m = g.map

    def work(ci, k):
        rng = stream(args.seed, purpose + "-chunk", ci)
        return forest_degree_samples(m, flavor, k, rng, boundary,
                                     root_vertices)

    parts = _run_chunks(work, args.replicas, args.threads)
    vals = np.concatenate(parts)
    mean = float(np.mean(vals))
    stderr = (float(np.std(vals, ddof=1) / math.sqrt(args.replicas))
              if args.replicas > 1 else 0.0)
    return g, mean, stderr


def _cmd_ust(args) -> None:
    g, mean, stderr = _degree_table(args, "ust", None, None, "ust")
    analytic = 2.0 - 2.0 / g.map.n_vertices
    _emit(args, ["flavor", "replicas", "mean_degree", "stderr", "analytic"],
          [["ust", args.replicas, mean, stderr, analytic]])


def _cmd_forest_degree(args) -> None:
    flavor = args.flavor
    g = _load_generated(args)
    m = g.map
    boundary = g.boundary_vertices
    if flavor in ("wired-ust", "mst-wired") and not boundary:
        _die("flavor %s needs a map family with boundary vertices" % flavor)
    root_vertices = None
    if g.family == "pq_ball":
        # center root keeps the estimate away from the patch boundary
        root_vertices = [m.tail(g.root_dart)] if m.n_darts else None
        p, q = g.params["p"], g.params["q"]
        reference = float(Fraction(q * (p - 2), p))
    else:
        reference = 2.0 - 2.0 / m.n_vertices

    def work(ci, k):
        rng = stream(args.seed, "forest-degree-chunk", ci)
        return forest_degree_samples(m, flavor, k, rng, boundary,
                                     root_vertices)

    parts = _run_chunks(work, args.replicas, args.threads)
    vals = np.concatenate(parts)
    mean = float(np.mean(vals))
    stderr = (float(np.std(vals, ddof=1) / math.sqrt(args.replicas))
              if args.replicas > 1 else 0.0)
    _emit(args, ["flavor", "replicas", "mean_degree", "stderr", "reference"],
          [[flavor, args.replicas, mean, stderr, reference]])


def _cmd_msf(args) -> None:
    g = _load_generated(args)
    m = g.map
    flavors = ["mst-free"]
    if g.boundary_vertices:
        flavors.append("mst-wired")
    rows = []
    for flavor in flavors:
        def work(ci, k, flavor=flavor):
            rng = stream(args.seed, flavor + "-chunk", ci)
            return forest_degree_samples(m, flavor, k, rng,
                                         g.boundary_vertices, None)

        vals = np.concatenate(_run_chunks(work, args.replicas, args.threads))
        stderr = (float(np.std(vals, ddof=1) / math.sqrt(args.replicas))
                  if args.replicas > 1 else 0.0)
        rows.append([flavor, args.replicas, float(np.mean(vals)), stderr])
    _emit(args, ["flavor", "replicas", "mean_degree", "stderr"], rows)


def _cmd_walk(args) -> None:
    g = _load_generated(args)
    m = g.map
    if m.n_darts == 0:
        _die("walks need a map with at least one edge")
    start = m.tail(g.root_dart) if g.root_dart is not None else 0

    def work(ci, k):
        out = []
        for rep in range(ci * _CHUNK, ci * _CHUNK + k):
            rng = stream(args.seed, "walk", rep)
            path = srw(m, start, args.steps, rng)
            seen = {start}
            v = start
            for d in path:
                v = int(m.head(d))
                seen.add(v)
            out.append([rep, args.steps, v, len(seen)])
        return out

    rows = [r for part in _run_chunks(work, args.replicas, args.threads)
            for r in part]
    _emit(args, ["replica", "steps", "end_vertex", "distinct_vertices"], rows)


def _cmd_perc(args) -> None:
    g = _load_generated(args)
    if args.ps:
        try:
            ps = [float(x) for x in args.ps.split(",") if x.strip()]
        except ValueError:
            _die("--ps must be a comma-separated float list")
    else:
        ps = [round(0.05 * k, 2) for k in range(1, 20)]
    table = percolation_sweep(g.map, ps, args.replicas, args.seed)
    rows = [[r["p"], r["mean_clusters"], r["mean_max_fraction"],
             r["crossing_prob"]] for r in table]
    _emit(args, ["p", "mean_clusters", "mean_max_fraction", "crossing_prob"],
          rows)


def _cmd_bslimit(args) -> None:
    if not args.gen:
        _die("bslimit needs --gen with a ;-separated list of specs")
    specs = [s for s in args.gen.split(";") if s.strip()]
    maps = [generate(parse_gen(s), stream(args.seed, "generate", i)).map
            for i, s in enumerate(specs)]
    rng = stream(args.seed, "bslimit", 0)
    laws, tvs = bs_sample(maps, args.radius, args.replicas, rng)
    rows = []
    for i, (m, law) in enumerate(zip(maps, laws)):
        tv = float("nan") if i == 0 else tvs[i - 1]
        rows.append([m.n_vertices, len(law.counts), tv])
    _emit(args, ["n", "distinct_balls", "tv_to_prev"], rows)


# -- identity suite ------------------------------------------------------


def _count_faces_direct(m: Map) -> int:
    seen = [False] * m.n_darts
    faces = 0
    for d in range(m.n_darts):
        if seen[d]:
            continue
        faces += 1
        c = d
        while not seen[c]:
            seen[c] = True
            c = int(m.sigma_inv[m.alpha[c]])
    return faces


def _neighbor_sets(m: Map) -> list[set]:
    out = [set() for _ in range(m.n_vertices)]
    for d in range(m.n_darts):
        out[int(m.vertex_of[d])].add(int(m.vertex_of[m.alpha[d]]))
    return out


def identity_checks(name: str, m: Map, seed: int):
    """Yield (check, ok, detail) rows for one corpus map."""
    v, e = m.n_vertices, m.n_edges
    f = _count_faces_direct(m)
    chi = v - e + f
    ok = (f == m.n_faces and chi % 2 == 0 and chi <= 2
          and m.genus == (2 - chi) // 2)
    yield "euler", ok, "V-E+F=%d genus=%d" % (chi, m.genus)

    target = Fraction(2 * (2 - 2 * m.genus))
    tot = total_curvature_exact(m)
    yield "gauss-bonnet", tot == target, "total=%s*pi target=%s*pi" % (tot, target)

    avg = average_curvature(m)
    want = 2.0 * math.pi * (2 - 2 * m.genus) / v
    yield "average-curvature", abs(avg - want) <= 1e-10, \
        "avg=%.17g want=%.17g" % (avg, want)

    lhs, rhs = dual_degree_identity(m)
    yield "dual-degree", abs(lhs - rhs) <= 1e-12, \
        "lhs=%.17g rhs=%.17g" % (lhs, rhs)

    if m.genus == 0:
        rng = stream(seed, "verify-omega", 0)
        k = int(rng.integers(0, e + 1))
        omega = rng.choice(e, size=k, replace=False) if k else []
        lhs, rhs = omega_dagger_identity(m, set(int(x) for x in omega))
        yield "omegadagger", abs(lhs - rhs) <= 1e-10, \
            "lhs=%.17g rhs=%.17g" % (lhs, rhs)

    nbr = _neighbor_sets(m)
    dist = [m.distances(u) for u in range(v)] if v <= 128 else None

    def f_adj(mm, a, b):
        return 1.0 if b in nbr[a] else 0.0

    lhs, rhs = mtp_check(m, f_adj)
    yield "mtp-adjacency", abs(lhs - rhs) <= 1e-12, \
        "lhs=%.17g rhs=%.17g" % (lhs, rhs)

    if dist is not None:
        def f_far(mm, a, b):
            return float(m.degree(a)) if dist[a][b] == 2 else 0.0

        lhs, rhs = mtp_check(m, f_far)
        yield "mtp-degree-radius2", abs(lhs - rhs) <= 1e-12, \
            "lhs=%.17g rhs=%.17g" % (lhs, rhs)

    dd = dual(dual(m))
    ok = bool(np.array_equal(dd.sigma, m.alpha[m.sigma[m.alpha]])
              and dual(m).genus == m.genus)
    yield "dual-involution", ok, "double dual = alpha-conjugate"

    if m.genus == 0 and v >= 2:
        t = wilson_ust(m, 0, stream(seed, "verify-ust", 0))
        df = dual_forest(m, t)
        ok = is_spanning_tree(dual(m), df)
        yield "tree-duality", ok, "complement spans the dual"


def run_identity_suite(seed: int):
    rows = []
    failures = 0
    for name, m in builtin_corpus():
        for check, ok, detail in identity_checks(name, m, seed):
            rows.append([name, check, "pass" if ok else "FAIL", detail])
            failures += 0 if ok else 1
    return rows, failures


def _cmd_verify(args) -> None:
    if args.corpus != "builtin":
        _die("only the builtin corpus is available")
    rows, failures = run_identity_suite(args.seed)
    rows.append(["TOTAL", "checks=%d" % len(rows),
                 "failures=%d" % failures, ""])
    _emit(args, ["map", "check", "status", "detail"], rows)
    if failures:
        raise IdentityFailure("%d identity check(s) failed" % failures)


# -- entry point ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="mapforge",
                                  description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, gen=True):
        if gen:
            p.add_argument("--gen", help="generator spec, e.g. grid:4x4")
            p.add_argument("--gen-toml", help="path to a TOML generator spec")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--replicas", type=int, default=100)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--json", action="store_true",
                       help="emit JSON instead of CSV")
        p.add_argument("--threads", type=int, default=1)

    common(sub.add_parser("gen", help="emit a map as JSON"))
    common(sub.add_parser("stats", help="curvature report"))
    common(sub.add_parser("ust", help="UST root-degree statistics"))
    p = sub.add_parser("msf", help="minimal forest degree statistics")
    common(p)
    p = sub.add_parser("walk", help="simple random walk summaries")
    common(p)
    p.add_argument("--steps", type=int, default=1000)
    p = sub.add_parser("perc", help="bond percolation sweep")
    common(p)
    p.add_argument("--ps", help="comma-separated threshold list")
    p = sub.add_parser("bslimit", help="ball-law convergence table")
    common(p)
    p.add_argument("--radius", type=int, default=2)
    p = sub.add_parser("forest-degree", help="forest degree vs reference")
    common(p)
    p.add_argument("--flavor", default="ust",
                   choices=["ust", "wired-ust", "mst-free", "mst-wired"])
    p = sub.add_parser("verify", help="run the exact identity suite")
    common(p, gen=False)
    p.add_argument("--corpus", default="builtin")
    return top


_DISPATCH = {
    "gen": _cmd_gen,
    "stats": _cmd_stats,
    "ust": _cmd_ust,
    "msf": _cmd_msf,
    "walk": _cmd_walk,
    "perc": _cmd_perc,
    "bslimit": _cmd_bslimit,
    "forest-degree": _cmd_forest_degree,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    env_seed = os.environ.get("MAPFORGE_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print("mapforge: bad MAPFORGE_SEED %r" % env_seed,
                  file=sys.stderr)
            return 2
    try:
        _DISPATCH[args.command](args)
    except IdentityFailure as exc:
        print("mapforge: %s" % exc, file=sys.stderr)
        return 1
    except MapError as exc:
        print("mapforge: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("mapforge: %s" % exc, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
