"""Simple random walk and discrete potential theory.

The walk picks a uniformly random dart at the current vertex, so
parallel edges and self-loops get their fair share of steps.  In the
Laplacian the loop terms cancel, and harmonic means ignore them.
"""
from __future__ import annotations

import heapq
import math
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EmptyBoundary, SourceInSink
from .map_core import Map
from .rng import UniformBuffer

__all__ = [
    "adjacency_csr",
    "srw",
    "stationarity_check",
    "harmonic_solve",
    "dirichlet_energy",
    "effective_resistance",
    "vel_objective",
    "intersection_stats",
]


def adjacency_csr(m: Map) -> tuple[np.ndarray, np.ndarray]:
    """Darts grouped by tail vertex: (offsets, darts).

    Row v of the structure lists every dart with tail v, in dart id
    order; walks index uniformly into the row.  Cached on the map.
    """
    hit = m._cache.get("csr")
    if hit is not None:
        return hit
    order = np.argsort(m.vertex_of, kind="stable")
    counts = np.bincount(m.vertex_of, minlength=m.n_vertices)
    offsets = np.zeros(m.n_vertices + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    out = (offsets, order.astype(np.int64))
    m._cache["csr"] = out
    return out


def srw(m: Map, start: int, steps: int, rng) -> list[int]:
    """Walk for the given number of steps; returns the darts used."""
    off, darts = adjacency_csr(m)
    head = m.alpha  # head(d) = tail(alpha(d))
    vo = m.vertex_of
    buf = UniformBuffer(rng)
    v = start
    out = []
    for _ in range(steps):
        lo, hi = off[v], off[v + 1]
        d = int(darts[lo + int(buf.next() * (hi - lo))])
        out.append(d)
        v = int(vo[head[d]])
    return out


def stationarity_check(m: Map, law: str = "degree") -> float:
    """Push a root law through one walk step, exactly, and report the
    largest coordinate of the defect."""
    deg = [int(m.degree(v)) for v in range(m.n_vertices)]
    two_e = m.n_darts
    if law == "degree":
        pi0 = [Fraction(d, two_e) for d in deg]
    elif law == "uniform":
        pi0 = [Fraction(1, m.n_vertices)] * m.n_vertices
    else:
        raise ValueError("law must be degree or uniform")
    out = [Fraction(0)] * m.n_vertices
    for d in range(m.n_darts):
        u = int(m.vertex_of[d])
        w = int(m.vertex_of[m.alpha[d]])
        out[w] += pi0[u] / deg[u]
    return float(max(abs(a - b) for a, b in zip(out, pi0)))


def _laplacian(m: Map) -> sp.csr_matrix:
    # loops cancel: assemble from non-loop darts only
    d = np.arange(m.n_darts)
    keep = m.vertex_of[d] != m.vertex_of[m.alpha[d]]
    rows = m.vertex_of[d[keep]]
    cols = m.vertex_of[m.alpha[d[keep]]]
    n = m.n_vertices
    a = sp.coo_matrix((np.ones(keep.sum()), (rows, cols)), shape=(n, n))
    lap = sp.diags(np.asarray(a.sum(axis=1)).ravel()) - a
    return lap.tocsr()


def harmonic_solve(m: Map, boundary: dict) -> np.ndarray:
    """Harmonic extension of boundary values, direct sparse solve with
    iterative refinement to residual 1e-12."""
    if not boundary:
        raise EmptyBoundary("need at least one pinned vertex")
    n = m.n_vertices
    h = np.zeros(n)
    bidx = np.array(sorted(boundary), dtype=np.int64)
    h[bidx] = [float(boundary[int(v)]) for v in bidx]
    interior = np.setdiff1d(np.arange(n), bidx)
    if interior.size == 0:
        return h
    lap = _laplacian(m)
    lii = lap[interior][:, interior].tocsc()
    lib = lap[interior][:, bidx]
    rhs = -lib @ h[bidx]
    lu = spla.splu(lii)
    x = lu.solve(rhs)
    for _ in range(5):
        r = rhs - lii @ x
        if np.max(np.abs(r)) <= 1e-12 * max(1.0, np.max(np.abs(rhs))):
            break
        x = x + lu.solve(r)
    h[interior] = x
    return h


def dirichlet_energy(m: Map, f) -> float:
    f = np.asarray(f, dtype=np.float64)
    diffs = f[m.vertex_of] - f[m.vertex_of[m.alpha]]
    return 0.5 * float(np.dot(diffs, diffs))


def effective_resistance(m: Map, source: int, sink) -> float:
    sink = set(int(v) for v in sink)
    if not sink:
        raise EmptyBoundary("sink must be nonempty")
    if source in sink:
        raise SourceInSink("source belongs to the sink set")
    boundary = {source: 1.0}
    boundary.update({v: 0.0 for v in sink})
    h = harmonic_solve(m, boundary)
    energy = dirichlet_energy(m, h)
    return 1.0 / energy


def vel_objective(m: Map, mass, source: int, sink) -> float:
    """(minimal path mass)^2 / ||m||^2 for a vertex measure.

    Path mass includes both endpoints; the minimum runs over all
    source-to-sink paths, found by a vertex-weighted Dijkstra.
    """
    sink = set(int(v) for v in sink)
    if not sink:
        raise EmptyBoundary("sink must be nonempty")
    mass = np.asarray(mass, dtype=np.float64)
    norm2 = float(np.dot(mass, mass))
    if norm2 == 0.0:
        return 0.0
    off, darts = adjacency_csr(m)
    dist = np.full(m.n_vertices, np.inf)
    dist[source] = mass[source]
    pq = [(dist[source], source)]
    while pq:
        dv, v = heapq.heappop(pq)
        if dv > dist[v]:
            continue
        if v in sink:
            return dv * dv / norm2
        for i in range(off[v], off[v + 1]):
            w = int(m.vertex_of[m.alpha[darts[i]]])
            alt = dv + mass[w]
            if alt < dist[w]:
                dist[w] = alt
                heapq.heappush(pq, (alt, w))
    return math.inf


def intersection_stats(m: Map, start1: int, start2: int, steps: int,
                       replicas: int, rng) -> dict:
    """Sizes of the common vertex trace of two independent walks."""
    sizes = []
    for _ in range(replicas):
        t1 = {start1} | {int(m.vertex_of[m.alpha[d]])
                         for d in srw(m, start1, steps, rng)}
        t2 = {start2} | {int(m.vertex_of[m.alpha[d]])
                         for d in srw(m, start2, steps, rng)}
        sizes.append(len(t1 & t2))
    arr = np.array(sizes, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=1)) if replicas > 1 else 0.0,
        "min": int(arr.min()),
        "max": int(arr.max()),
    }
