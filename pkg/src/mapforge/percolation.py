"""Bernoulli bond percolation with a monotone coupling, plus a finite
Cheeger-constant oracle.

One label per edge drives every threshold: the open set at p is the
set of edges with label at most p, so increasing p only ever adds
edges.  Loops may be open but never merge clusters.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import TooLarge
from .map_core import Map
from .rng import edge_weights

__all__ = [
    "PercolationState",
    "percolate",
    "cluster_stats",
    "percolation_sweep",
    "CheegerReport",
    "cheeger_exact",
]


@dataclass(frozen=True)
class PercolationState:
    labels: np.ndarray
    p: float
    open_edges: np.ndarray   # bool per edge
    component: np.ndarray    # cluster id per vertex, dense from 0
    sizes: np.ndarray        # cluster sizes indexed by cluster id


def _components(m: Map, open_edges) -> tuple[np.ndarray, np.ndarray]:
    parent = np.arange(m.n_vertices)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in np.flatnonzero(open_edges):
        d, a = m.edge_darts(int(e))
        ru, rv = find(int(m.vertex_of[d])), find(int(m.vertex_of[a]))
        if ru != rv:
            parent[rv] = ru
    roots = np.array([find(v) for v in range(m.n_vertices)])
    _, comp = np.unique(roots, return_inverse=True)
    sizes = np.bincount(comp)
    return comp, sizes


def percolate(m: Map, labels, p: float) -> PercolationState:
    labels = np.asarray(labels, dtype=np.float64)
    open_edges = labels <= p
    comp, sizes = _components(m, open_edges)
    return PercolationState(labels, float(p), open_edges, comp, sizes)


def cluster_stats(state: PercolationState) -> dict:
    sizes = state.sizes
    return {
        "n_clusters": int(sizes.size),
        "max_size": int(sizes.max()),
        "sizes": np.sort(sizes)[::-1].tolist(),
        "open_fraction": float(state.open_edges.mean()),
    }


def percolation_sweep(m: Map, ps, replicas: int, seed: int,
                      terminals=None) -> list[dict]:
    """Sweep thresholds with one label set per replica, reusing the
    union-find state as p increases (the monotone coupling).

    terminals, when given, is a pair of vertex sets; the crossing
    column reports how often some pair across them is connected.
    """
    ps = sorted(float(p) for p in ps)
    n = m.n_vertices
    ends = np.array([[int(m.vertex_of[d]), int(m.vertex_of[a])]
                     for d, a in (m.edge_darts(e) for e in range(m.n_edges))])
    acc = {p: {"clusters": 0.0, "max_frac": 0.0, "crossing": 0.0}
           for p in ps}
    for rep in range(replicas):
        labels = edge_weights(m.n_edges, seed, rep)
        order = np.argsort(labels)
        parent = list(range(n))
        size = [1] * n

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        n_comp = n
        max_sz = 1 if n else 0
        i = 0
        for p in ps:
            while i < m.n_edges and labels[order[i]] <= p:
                u, v = ends[order[i]]
                i += 1
                ru, rv = find(int(u)), find(int(v))
                if ru == rv:
                    continue
                if size[ru] < size[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                size[ru] += size[rv]
                n_comp -= 1
                if size[ru] > max_sz:
                    max_sz = size[ru]
            row = acc[p]
            row["clusters"] += n_comp
            row["max_frac"] += max_sz / n
            if terminals is not None:
                a_roots = {find(int(x)) for x in terminals[0]}
                crossed = any(find(int(y)) in a_roots for y in terminals[1])
                row["crossing"] += 1.0 if crossed else 0.0
    out = []
    for p in ps:
        row = acc[p]
        out.append({
            "p": p,
            "mean_clusters": row["clusters"] / replicas,
            "mean_max_fraction": row["max_frac"] / replicas,
            "crossing_prob": (row["crossing"] / replicas
                              if terminals is not None else float("nan")),
        })
    return out


@dataclass(frozen=True)
class CheegerReport:
    vertices: tuple[int, ...]
    cut: int
    size: int
    ratio: float
    ratio_exact: Fraction


def cheeger_exact(m: Map, max_vertices: int = 24) -> CheegerReport:
    """Exhaustive edge-isoperimetric minimizer over subsets of at most
    half the vertices."""
    n = m.n_vertices
    if n > max_vertices:
        raise TooLarge("subset enumeration is capped at %d vertices"
                       % max_vertices)
    if n < 2:
        raise TooLarge("need at least two vertices")
    pairs = []
    for e in range(m.n_edges):
        d, a = m.edge_darts(e)
        u, v = int(m.vertex_of[d]), int(m.vertex_of[a])
        if u != v:
            pairs.append((u, v))
    half = n // 2
    best = None  # (cut, size, mask) under ratio order
    chunk = 1 << 17
    total = 1 << n
    for lo in range(1, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int8)
        sizes = bits.sum(axis=1, dtype=np.int64)
        keep = (sizes >= 1) & (sizes <= half)
        if not keep.any():
            continue
        masks, bits, sizes = masks[keep], bits[keep], sizes[keep]
        cuts = np.zeros(masks.size, dtype=np.int64)
        for u, v in pairs:
            cuts += bits[:, u] != bits[:, v]
        idx = int(np.argmin(cuts / sizes))
        cand = (int(cuts[idx]), int(sizes[idx]), int(masks[idx]))
        if best is None or cand[0] * best[1] < best[0] * cand[1]:
            best = cand
    cut, size, mask = best
    verts = tuple(v for v in range(n) if (mask >> v) & 1)
    return CheegerReport(verts, cut, size, cut / size, Fraction(cut, size))
