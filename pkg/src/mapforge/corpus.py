"""Built-in test corpora.

builtin_corpus gives named small maps spanning genus 0, 1 and 2, with
loops, parallel edges, trees, lattices, balls and random rotations.
corpus_100 derives one hundred rooted maps from it for metric tests.
"""
from __future__ import annotations

import numpy as np

from .generators import generate, parse_gen
from .map_core import Map, RootedMap, build_map, dual
from .rng import stream

__all__ = ["builtin_corpus", "corpus_100"]

_CORPUS = None
_ROOTED = None


def _bouquet(pairs) -> Map:
    """One vertex, loops only; sigma is the full cycle on the darts and
    the pairing decides nesting, hence the genus."""
    n = 2 * len(pairs)
    sigma = [(i + 1) % n for i in range(n)]
    alpha = [0] * n
    for a, b in pairs:
        alpha[a], alpha[b] = b, a
    return build_map(sigma, alpha)


def _dumbbell() -> Map:
    # two loops joined by a bridge
    return build_map([1, 4, 3, 5, 0, 2], [1, 0, 3, 2, 5, 4])


def _path3() -> Map:
    return build_map([0, 2, 1, 3], [1, 0, 3, 2])


def _star(k: int) -> Map:
    sigma = list(range(2 * k))
    for i in range(k):
        sigma[2 * i] = 2 * ((i + 1) % k)
    alpha = [d ^ 1 for d in range(2 * k)]
    return build_map(sigma, alpha)


def _doubled_triangle() -> Map:
    # triangle with one edge doubled so a digon face appears
    sigma = [2, 4, 7, 1, 3, 6, 5, 0]
    alpha = [1, 0, 3, 2, 5, 4, 7, 6]
    return build_map(sigma, alpha)


def _k4_reversed() -> Map:
    """Complete graph on 4 vertices with one rotation reversed; the
    flip costs a handle."""
    base = generate(parse_gen("complete:4")).map
    sigma = base.sigma.copy()
    row = base.darts_of_vertex(0)
    for i, d in enumerate(row):
        sigma[d] = row[(i - 1) % len(row)]
    return build_map(sigma, base.alpha)


def _searched_rotation(base_spec: str, genus: int, limit: int = 600) -> Map:
    spec = parse_gen("random_rotation:" + base_spec)
    for seed in range(limit):
        g = generate(spec, stream(seed, "corpus-rot", 0))
        if g.map.genus == genus:
            return g.map
    raise RuntimeError("no rotation of %s with genus %d in %d seeds"
                       % (base_spec, genus, limit))


def _gen(spec: str, seed: int = 0) -> Map:
    return generate(parse_gen(spec), stream(seed, "corpus-gen", 0)).map


def builtin_corpus() -> list[tuple[str, Map]]:
    """Named maps, each with at least one dart; built once and cached."""
    global _CORPUS
    if _CORPUS is not None:
        return _CORPUS
    entries: list[tuple[str, Map]] = []

    def add(name, m):
        entries.append((name, m))

    for n in (1, 2, 3, 4, 5, 6, 8):
        add("cycle-%d" % n, _gen("cycle:%d" % n))
    for solid in ("tetrahedron", "cube", "octahedron", "dodecahedron",
                  "icosahedron"):
        add(solid, _gen("platonic:" + solid))
    add("k4", _gen("complete:4"))
    add("k4-reversed", _k4_reversed())
    add("k5", _gen("complete:5"))
    add("bouquet-1", _bouquet([(0, 1)]))
    add("bouquet-2-nested", _bouquet([(0, 3), (1, 2)]))
    add("bouquet-2-interleaved", _bouquet([(0, 2), (1, 3)]))
    add("bouquet-4-genus2", _bouquet([(0, 2), (1, 3), (4, 6), (5, 7)]))
    add("theta", dual(_gen("cycle:3")))
    add("dumbbell", _dumbbell())
    add("triangle-doubled", _doubled_triangle())
    add("path-3", _path3())
    add("star-3", _star(3))
    add("star-5", _star(5))
    for w, h in ((2, 2), (3, 3), (4, 4), (6, 6), (2, 5)):
        add("grid-%dx%d" % (w, h), _gen("grid:%d,%d" % (w, h)))
    for r in (1, 2, 3):
        add("disc-%d" % r, _gen("disc_grid:%d" % r))
    for w, h in ((1, 1), (2, 2), (3, 3), (4, 4), (2, 3), (5, 5), (8, 8)):
        add("torus-%dx%d" % (w, h), _gen("torus_grid:%d,%d" % (w, h)))
    for p, q, r in ((3, 7, 1), (3, 7, 2), (3, 7, 3), (4, 5, 2), (5, 4, 2),
                    (7, 3, 2), (3, 8, 2), (4, 6, 1)):
        add("ball-%d-%d-r%d" % (p, q, r), _gen("pq_ball:%d,%d,%d" % (p, q, r)))
    for n in (1, 2, 3, 4):
        add("canopy-%d" % n, _gen("canopy_pair:%d" % n))
    for n in (1, 2, 3):
        add("thick-canopy-%d" % n, _gen("thick_canopy:%d" % n))
    add("gw-poisson", _gen("gw_tree:poisson,0.9,5"))
    add("gw-geometric", _gen("gw_tree:geometric,0.8,5"))
    add("gw-sized", _gen("gw_tree:poisson,0.9,4,size_biased"))
    add("gw-det", _gen("gw_tree:deterministic,2,3"))
    add("rot-grid33-g1", _searched_rotation("grid:3,3", 1))
    add("rot-grid33-g2", _searched_rotation("grid:3,3", 2))
    add("rot-k4-g1", _searched_rotation("complete:4", 1))
    _CORPUS = entries
    return entries


def corpus_100() -> list[tuple[str, RootedMap]]:
    """One hundred rooted maps: corpus maps under a spread of root
    darts, plus a rebuilt duplicate pair so distance zero occurs."""
    global _ROOTED
    if _ROOTED is not None:
        return _ROOTED
    out: list[tuple[str, RootedMap]] = []
    small = [(name, m) for name, m in builtin_corpus()
             if m.n_vertices <= 40]
    i = 0
    while len(out) < 98:
        name, m = small[i % len(small)]
        k = i // len(small)
        root = (k * 7) % m.n_darts
        out.append(("%s@%d" % (name, root), RootedMap(m, root)))
        i += 1
    # independently rebuilt copies, isomorphic to entries above
    out.append(("grid-3x3-copy@0", RootedMap(_gen("grid:3,3"), 0)))
    out.append(("cycle-6-copy@0", RootedMap(_gen("cycle:6"), 0)))
    _ROOTED = out
    return _ROOTED
