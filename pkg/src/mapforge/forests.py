"""Uniform and minimal spanning trees and forests.

Wilson's algorithm is implemented twice: a sequential reference that
follows the textbook loop-erasure, and a replica-vectorized variant
used for large Monte-Carlo runs.  Both walk on darts, so parallel
edges keep their identity in the sampled trees.  Exact counting goes
through fraction-free integer determinants, never floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (DuplicateWeights, EmptyBoundary, EmptyTargets,
                     NoMarkedFaces, NotPlanar, NotSpanningTree)
from .map_core import Map
from .rng import UniformBuffer
from .walks import adjacency_csr, effective_resistance

try:
    from gmpy2 import mpz
except ImportError:  # pure-python ints work, just slower
    mpz = int

__all__ = [
    "Forest",
    "lerw",
    "wilson_ust",
    "wilson_ust_batch",
    "wilson_dual_infinity",
    "wilson_dual_batch",
    "spanning_tree_count",
    "ust_edge_probability_exact",
    "enumerate_spanning_trees",
    "dual_forest",
    "mst_free",
    "mst_wired",
    "forest_degree_stats",
    "ust_mean_degree_exact",
    "is_spanning_tree",
]


@dataclass(frozen=True)
class Forest:
    """Edge subset of a map, tagged by how it was produced."""

    edges: np.ndarray  # bool bitmap over edge ids
    flavor: str

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.edges))

    def edge_ids(self) -> list[int]:
        return [int(e) for e in np.flatnonzero(self.edges)]

    def degree(self, m: Map, v: int) -> int:
        return sum(1 for d in m.darts_of_vertex(v)
                   if self.edges[m.edge_of[d]]
                   and m.head(d) != v)  # loops are never tree edges


def _bitmap(n: int, ids) -> np.ndarray:
    b = np.zeros(n, dtype=bool)
    for e in ids:
        b[e] = True
    return b


class _UnionFind:
    __slots__ = ["p", "r"]

    def __init__(self, n):
        self.p = list(range(n))
        self.r = [0] * n

    def find(self, x):
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.r[ra] < self.r[rb]:
            ra, rb = rb, ra
        self.p[rb] = ra
        if self.r[ra] == self.r[rb]:
            self.r[ra] += 1
        return True


def is_spanning_tree(m: Map, forest: Forest) -> bool:
    ids = forest.edge_ids()
    if len(ids) != m.n_vertices - 1:
        return False
    uf = _UnionFind(m.n_vertices)
    for e in ids:
        d, a = m.edge_darts(e)
        if not uf.union(int(m.vertex_of[d]), int(m.vertex_of[a])):
            return False
    return True


# -- loop-erased walks and Wilson ----------------------------------------


def lerw(m: Map, start: int, targets, rng) -> tuple[list[int], list[int]]:
    """Loop-erased walk from start into the target set.

    Returns (vertices, darts); erasure is chronological, realized by
    truncating the growing path whenever it revisits a vertex.
    """
    targets = set(int(v) for v in targets)
    if not targets:
        raise EmptyTargets("no targets to walk to")
    if start in targets:
        return [start], []
    off, darts = adjacency_csr(m)
    buf = UniformBuffer(rng)
    pos = {start: 0}
    vpath = [start]
    dpath: list[int] = []
    while True:
        v = vpath[-1]
        lo, hi = int(off[v]), int(off[v + 1])
        d = int(darts[lo + int(buf.next() * (hi - lo))])
        w = int(m.vertex_of[m.alpha[d]])
        if w in pos:
            k = pos[w]
            for u in vpath[k + 1:]:
                del pos[u]
            del vpath[k + 1:]
            del dpath[k:]
            continue
        vpath.append(w)
        dpath.append(d)
        if w in targets:
            return vpath, dpath
        pos[w] = len(vpath) - 1


def _root_set(root) -> set[int]:
    if isinstance(root, (int, np.integer)):
        return {int(root)}
    return set(int(v) for v in root)


def wilson_ust(m: Map, root, rng, order=None) -> Forest:
    """Uniform spanning tree via Wilson's algorithm.

    root may be a vertex or a vertex set; a set acts as one identified
    boundary class (wired), and edges inside the class never appear.
    """
    roots = _root_set(root)
    off, darts = adjacency_csr(m)
    head_of = m.vertex_of[m.alpha]
    eo = m.edge_of
    buf = UniformBuffer(rng)
    in_tree = bytearray(m.n_vertices)
    for v in roots:
        in_tree[v] = 1
    nxt = [0] * m.n_vertices
    edges: list[int] = []
    for v in (order if order is not None else range(m.n_vertices)):
        if in_tree[v]:
            continue
        u = v
        while not in_tree[u]:
            lo, hi = int(off[u]), int(off[u + 1])
            d = int(darts[lo + int(buf.next() * (hi - lo))])
            nxt[u] = d
            u = int(head_of[d])
        u = v
        while not in_tree[u]:
            in_tree[u] = 1
            d = nxt[u]
            edges.append(int(eo[d]))
            u = int(head_of[d])
    flavor = "ust" if len(roots) == 1 else "wired-ust"
    return Forest(_bitmap(m.n_edges, edges), flavor)


def _batch_wilson(off, darts, head_of, eo, n_sites, roots, n_samples,
                  rng, order=None):
    """Replica-vectorized Wilson; returns an (n_samples, n_sites - r)
    matrix of edge ids in the order each replica added them."""
    deg = (off[1:] - off[:-1]).astype(np.float64)
    r = n_samples
    in_tree = np.zeros((r, n_sites), dtype=bool)
    in_tree[:, sorted(roots)] = True
    nxt = np.zeros((r, n_sites), dtype=np.int64)
    out = np.empty((r, n_sites - len(roots)), dtype=np.int64)
    ptr = np.zeros(r, dtype=np.int64)
    for v in (order if order is not None else range(n_sites)):
        rows = np.flatnonzero(~in_tree[:, v])
        cur = np.full(rows.size, v, dtype=np.int64)
        act, acur = rows, cur
        while act.size:
            u = rng.random(act.size)
            d = darts[off[acur] + (u * deg[acur]).astype(np.int64)]
            nxt[act, acur] = d
            acur = head_of[d]
            hit = in_tree[act, acur]
            act, acur = act[~hit], acur[~hit]
        act, acur = rows, cur
        while act.size:
            in_tree[act, acur] = True
            d = nxt[act, acur]
            out[act, ptr[act]] = eo[d]
            ptr[act] += 1
            acur = head_of[d]
            done = in_tree[act, acur]
            act, acur = act[~done], acur[~done]
    return out


def wilson_ust_batch(m: Map, root, n_samples: int, rng,
                     order=None) -> np.ndarray:
    roots = _root_set(root)
    off, darts = adjacency_csr(m)
    return _batch_wilson(off, darts, m.vertex_of[m.alpha], m.edge_of,
                         m.n_vertices, roots, n_samples, rng, order)


def _dual_csr(m: Map):
    """Darts grouped by face, the walk structure of the dual graph."""
    hit = m._cache.get("dual_csr")
    if hit is not None:
        return hit
    order = np.argsort(m.face_of, kind="stable").astype(np.int64)
    counts = np.bincount(m.face_of, minlength=m.n_faces)
    offsets = np.zeros(m.n_faces + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    out = (offsets, order)
    m._cache["dual_csr"] = out
    return out


def wilson_dual_infinity(m: Map, infinite_faces, rng) -> tuple[Forest, Forest]:
    """Wilson run in the dual, rooted at the marked face class.

    Grows a dual forest from the marked faces by loop-erased dual
    walks; returns (primal complement forest, dual forest).  With a
    single marked face the primal part is an exact uniform spanning
    tree of the map.
    """
    marked = _root_set(infinite_faces)
    if m.genus != 0:
        raise NotPlanar("dual-rooted sampling needs genus 0")
    if not marked:
        raise NoMarkedFaces("mark at least one face")
    off, darts = _dual_csr(m)
    head_of = m.face_of[m.alpha]
    buf = UniformBuffer(rng)
    in_forest = bytearray(m.n_faces)
    for f in marked:
        in_forest[f] = 1
    nxt = [0] * m.n_faces
    dual_edges: list[int] = []
    for f in range(m.n_faces):
        if in_forest[f]:
            continue
        u = f
        while not in_forest[u]:
            lo, hi = int(off[u]), int(off[u + 1])
            d = int(darts[lo + int(buf.next() * (hi - lo))])
            nxt[u] = d
            u = int(head_of[d])
        u = f
        while not in_forest[u]:
            in_forest[u] = 1
            d = nxt[u]
            dual_edges.append(int(m.edge_of[d]))
            u = int(head_of[d])
    dual_bm = _bitmap(m.n_edges, dual_edges)
    primal = Forest(~dual_bm, "free-variant")
    return primal, Forest(dual_bm, "dual-forest")


def wilson_dual_batch(m: Map, infinite_faces, n_samples: int,
                      rng) -> np.ndarray:
    """Edge-id matrix of dual forests; the primal forest of a row is
    the complement of its edge set."""
    marked = _root_set(infinite_faces)
    if m.genus != 0:
        raise NotPlanar("dual-rooted sampling needs genus 0")
    if not marked:
        raise NoMarkedFaces("mark at least one face")
    off, darts = _dual_csr(m)
    return _batch_wilson(off, darts, m.face_of[m.alpha], m.edge_of,
                         m.n_faces, marked, n_samples, rng)


# -- exact counting ------------------------------------------------------


def _det_bareiss(a) -> int:
    """Fraction-free determinant of an integer matrix, destructive."""
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = mpz(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pk - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pk
    return int(sign * a[n - 1][n - 1])


def _edge_list(m: Map) -> list[tuple[int, int]]:
    out = []
    for e in range(m.n_edges):
        d, a = m.edge_darts(e)
        out.append((int(m.vertex_of[d]), int(m.vertex_of[a])))
    return out


def _tree_count_edges(n: int, edges) -> int:
    """Matrix-tree determinant from a multigraph edge list."""
    if n <= 1:
        return 1
    lap = [[mpz(0)] * (n - 1) for _ in range(n - 1)]
    for u, v in edges:
        if u == v:
            continue  # loops never affect tree counts
        for x in (u, v):
            if x < n - 1:
                lap[x][x] += 1
        if u < n - 1 and v < n - 1:
            lap[u][v] -= 1
            lap[v][u] -= 1
    return _det_bareiss(lap)


def spanning_tree_count(m: Map) -> int:
    return _tree_count_edges(m.n_vertices, _edge_list(m))


def ust_edge_probability_exact(m: Map, e: int) -> Fraction:
    """P(e in UST) as count(trees through e) / count(trees)."""
    edges = _edge_list(m)
    u, v = edges[e]
    if u == v:
        return Fraction(0)
    total = _tree_count_edges(m.n_vertices, edges)
    # contract e: relabel v -> u, compact ids
    relab = list(range(m.n_vertices))
    relab[v] = u
    newid = {}
    for x in sorted(set(relab)):
        newid[x] = len(newid)
    contracted = []
    for i, (a, b) in enumerate(edges):
        if i == e:
            continue
        contracted.append((newid[relab[a]], newid[relab[b]]))
    through = _tree_count_edges(m.n_vertices - 1, contracted)
    return Fraction(through, total)


def enumerate_spanning_trees(m: Map) -> list[tuple[int, ...]]:
    """All spanning trees as sorted edge-id tuples; small maps only."""
    edges = _edge_list(m)
    good = [e for e in range(m.n_edges) if edges[e][0] != edges[e][1]]
    k = m.n_vertices - 1
    out = []
    for sub in combinations(good, k):
        uf = _UnionFind(m.n_vertices)
        ok = True
        for e in sub:
            if not uf.union(*edges[e]):
                ok = False
                break
        if ok:
            out.append(tuple(sub))
    return out


# -- minimal spanning forests --------------------------------------------


def _check_weights(m: Map, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (m.n_edges,):
        raise DuplicateWeights("need exactly one weight per edge")
    if np.unique(w).size != w.size:
        raise DuplicateWeights("edge weights must be distinct")
    return w


def mst_free(m: Map, weights) -> Forest:
    w = _check_weights(m, weights)
    edges = _edge_list(m)
    uf = _UnionFind(m.n_vertices)
    chosen = []
    for e in np.argsort(w):
        u, v = edges[e]
        if u != v and uf.union(u, v):
            chosen.append(int(e))
    return Forest(_bitmap(m.n_edges, chosen), "mst-free")


def mst_wired(m: Map, weights, boundary) -> Forest:
    w = _check_weights(m, weights)
    bset = _root_set(boundary)
    if not bset:
        raise EmptyBoundary("wired flavor needs a boundary class")
    edges = _edge_list(m)
    uf = _UnionFind(m.n_vertices)
    it = iter(bset)
    b0 = next(it)
    for b in it:
        uf.union(b0, b)
    chosen = []
    for e in np.argsort(w):
        u, v = edges[e]
        if u != v and uf.union(u, v):
            chosen.append(int(e))
    return Forest(_bitmap(m.n_edges, chosen), "mst-wired")


# -- degree statistics ---------------------------------------------------


def ust_mean_degree_exact(m: Map, v: int) -> float:
    """Expected tree degree of v under the UST, via the resistance
    identity P(e in T) = R_eff(endpoints of e)."""
    total = 0.0
    cache: dict[int, float] = {}
    for d in m.darts_of_vertex(v):
        w = m.head(d)
        if w == v:
            continue
        if w not in cache:
            cache[w] = effective_resistance(m, v, {w})
        total += cache[w]
    return total


def forest_degree_samples(m: Map, flavor: str, replicas: int, rng,
                          boundary=None, root_vertices=None) -> np.ndarray:
    """Per-replica mean forest degree over the chosen root set."""
    n = m.n_vertices
    roots = (np.asarray(sorted(root_vertices), dtype=np.int64)
             if root_vertices is not None else np.arange(n))
    dart_vert = m.vertex_of
    loop_dart = m.vertex_of == m.vertex_of[m.alpha]
    if flavor in ("ust", "wired-ust"):
        root = {0} if flavor == "ust" else _root_set(boundary)
        if flavor == "wired-ust" and not root:
            raise EmptyBoundary("wired flavor needs a boundary class")
        mat = wilson_ust_batch(m, root, replicas, rng)
        in_forest = np.zeros((replicas, m.n_edges), dtype=bool)
        np.put_along_axis(in_forest, mat, True, axis=1)
        dart_open = in_forest[:, m.edge_of] & ~loop_dart[None, :]
        deg = np.zeros((replicas, n), dtype=np.int64)
        np.add.at(deg.T, dart_vert, dart_open.T.astype(np.int64))
        return deg[:, roots].mean(axis=1)
    means = []
    for _ in range(replicas):
        w = rng.random(m.n_edges)
        while np.unique(w).size != w.size:
            w = rng.random(m.n_edges)
        if flavor == "mst-free":
            f = mst_free(m, w)
        elif flavor == "mst-wired":
            f = mst_wired(m, w, boundary)
        else:
            raise ValueError("unknown flavor %r" % flavor)
        means.append(np.mean([f.degree(m, int(v)) for v in roots]))
    return np.asarray(means, dtype=np.float64)


def forest_degree_stats(m: Map, flavor: str, replicas: int, rng,
                        boundary=None, root_vertices=None) -> dict:
    """Monte-Carlo mean forest degree at a uniform root.

    root_vertices restricts the root to a subset (e.g. interior
    vertices of a patch).  For the plain UST the analytic mean over
    all vertices, 2 - 2/V, is included.
    """
    means = forest_degree_samples(m, flavor, replicas, rng,
                                  boundary, root_vertices)
    mean = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / np.sqrt(replicas)) \
        if replicas > 1 else 0.0
    out = {"flavor": flavor, "replicas": replicas,
           "mean": mean, "stderr": stderr}
    if flavor == "ust":
        out["analytic"] = 2.0 - 2.0 / m.n_vertices
    return out


def dual_forest(m: Map, forest: Forest) -> Forest:
    """Complement forest on the dual map; dual edge ids coincide with
    primal edge ids because alpha is shared."""
    if m.genus != 0:
        raise NotPlanar("complement duality needs genus 0")
    if not is_spanning_tree(m, forest):
        raise NotSpanningTree("input must be a spanning tree")
    comp = ~forest.edges
    # dual spanning tree: F - 1 edges joining all faces acyclically
    uf = _UnionFind(m.n_faces)
    for e in np.flatnonzero(comp):
        d, a = m.edge_darts(int(e))
        if not uf.union(int(m.face_of[d]), int(m.face_of[a])):
            raise AssertionError("complement of a spanning tree "
                                 "must be acyclic in the dual")
    return Forest(comp, "dual-" + forest.flavor)
