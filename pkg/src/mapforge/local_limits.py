"""Local metric on rooted maps, empirical ball laws at uniform roots,
and exact mass-transport verification.

The metric is e^(-R) with R the largest radius at which the rooted
balls agree.  Radius-0 agreement compares the root's degree and its
loop pattern; the value is capped at 1.  Agreement at positive radii
is rooted-map isomorphism via canonical codes, or rooted-graph
isomorphism behind the graph_only flag.
"""
from __future__ import annotations

import base64
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .map_core import Map, RootedMap, ball_with_vertices, canonical_code

__all__ = [
    "dloc",
    "ball_code",
    "vertex_ball_code",
    "exact_ball_law",
    "EmpiricalBallLaw",
    "bs_sample",
    "mtp_check",
    "transport_invariance_check",
    "degree_biased_root",
]


def _root_zero_code(rooted: RootedMap) -> bytes:
    """Degree and loop structure at the root, the radius-0 base case."""
    b, orig = ball_with_vertices(rooted, 0)
    marks = [_safe_degree(rooted.map, int(v)) for v in orig]
    return canonical_code(b, vertex_marks=marks)


def _safe_degree(m: Map, v: int) -> int:
    return int(m.degree(v)) if m.n_darts else 0


def ball_code(rooted: RootedMap, r: int, degree_marks: bool = False) -> bytes:
    """Canonical code of the radius-r ball.

    With degree_marks each retained vertex carries its degree in the
    ambient map, so truncation depth stays visible in the code.
    """
    b, orig = ball_with_vertices(rooted, r)
    if not degree_marks:
        return canonical_code(b)
    marks = [_safe_degree(rooted.map, int(v)) for v in orig]
    return canonical_code(b, vertex_marks=marks)


def _ball_profile(rooted: RootedMap, graph_only: bool = False):
    """Codes of balls of radius 0, 1, ... until the ball saturates."""
    key = ("profile", rooted.root_dart, graph_only)
    hit = rooted.map._cache.get(key)
    if hit is not None:
        return hit
    enc = _graph_code if graph_only else (lambda rm: canonical_code(rm))
    out = [_graph_zero_code(rooted) if graph_only
           else _root_zero_code(rooted)]
    r = 1
    while True:
        b, _ = ball_with_vertices(rooted, r)
        out.append(enc(b))
        if b.map.n_darts == rooted.map.n_darts:
            break
        r += 1
    rooted.map._cache[key] = out
    return out


def _graph_zero_code(rooted: RootedMap) -> bytes:
    m = rooted.map
    if m.n_darts == 0:
        return b"G0:0,0"
    v = rooted.root_vertex
    loops = sum(1 for d in m.darts_of_vertex(v) if m.head(d) == v)
    return b"G0:%d,%d" % (m.degree(v), loops)


def _graph_code(rm: RootedMap) -> bytes:
    """Canonical form of the underlying rooted graph: minimum rooted
    map code over all rotation reorderings.  Exponential in vertex
    degrees; meant for small balls behind the graph_only flag."""
    from itertools import permutations

    m = rm.map
    if m.n_darts == 0:
        return b"G:empty"
    best = None
    rows = [m.darts_of_vertex(v) for v in range(m.n_vertices)]
    # enumerate rotations vertex by vertex; degrees above 6 would blow
    # up, so cap the search and fall back to the map code
    total = 1
    for row in rows:
        k = max(len(row) - 1, 1)
        total *= math.factorial(k)
        if total > 200_000:
            from .errors import TooLarge

            raise TooLarge("graph-only comparison needs %d rotation "
                           "candidates" % total)
    sigma = np.empty(m.n_darts, dtype=np.int64)

    def rec(v):
        nonlocal best
        if v == m.n_vertices:
            code = canonical_code(RootedMap(Map(sigma.copy(), m.alpha.copy(),
                                                check=False), rm.root_dart))
            if best is None or code < best:
                best = code
            return
        row = rows[v]
        first, rest = row[0], row[1:]
        for perm in permutations(rest):
            cyc = [first, *perm]
            for i, d in enumerate(cyc):
                sigma[d] = cyc[(i + 1) % len(cyc)]
            rec(v + 1)

    rec(0)
    return b"G:" + best


def _agreement_radius(pa, pb):
    """Largest r with equal codes, or None when equal at all radii."""
    r = 0
    while True:
        ca = pa[min(r, len(pa) - 1)]
        cb = pb[min(r, len(pb) - 1)]
        if ca != cb:
            return r - 1
        if r >= len(pa) - 1 and r >= len(pb) - 1:
            return None
        r += 1


def dloc(a: RootedMap, b: RootedMap, graph_only: bool = False) -> float:
    pa = _ball_profile(a, graph_only)
    pb = _ball_profile(b, graph_only)
    radius = _agreement_radius(pa, pb)
    if radius is None:
        return 0.0
    if radius <= 0:
        return 1.0
    return math.exp(-radius)


# -- empirical ball laws -------------------------------------------------


def vertex_ball_code(m: Map, v: int, r: int,
                     degree_marks: bool = False) -> bytes:
    """Ball code rooted at a vertex: minimum over its darts.

    The ball does not depend on the chosen dart, so it is built once
    and only the root of the code varies.
    """
    darts = m.darts_of_vertex(v)
    if not darts:
        return ball_code(RootedMap(m, None), r, degree_marks)
    rooted = RootedMap(m, int(darts[0]))
    b, orig = ball_with_vertices(rooted, r)
    sub = b.map
    if sub.n_darts == 0:
        return ball_code(rooted, r, degree_marks)
    marks = ([_safe_degree(m, int(u)) for u in orig]
             if degree_marks else None)
    root_v = b.root_vertex
    return min(canonical_code(RootedMap(sub, int(d)), vertex_marks=marks)
               for d in sub.darts_of_vertex(root_v))


@dataclass(frozen=True)
class EmpiricalBallLaw:
    counts: dict
    total: int

    def probability(self, code: bytes) -> Fraction:
        return Fraction(self.counts.get(code, 0), self.total)

    def tv(self, other: "EmpiricalBallLaw") -> float:
        codes = set(self.counts) | set(other.counts)
        return 0.5 * float(sum(abs(self.probability(c) - other.probability(c))
                               for c in codes))

    def to_json_obj(self) -> list:
        return [{"code": base64.b64encode(c).decode("ascii"), "count": n}
                for c, n in sorted(self.counts.items())]


def exact_ball_law(m: Map, r: int, degree_marks: bool = False) -> EmpiricalBallLaw:
    counts: dict = {}
    for v in range(m.n_vertices):
        c = vertex_ball_code(m, v, r, degree_marks)
        counts[c] = counts.get(c, 0) + 1
    return EmpiricalBallLaw(counts, m.n_vertices)


def bs_sample(maps, r: int, n_roots: int, rng,
              degree_marks: bool = False) -> tuple[list, list]:
    """Empirical radius-r ball law at uniform roots, one per map, and
    total-variation distances between successive laws."""
    laws = []
    for m in maps:
        counts: dict = {}
        roots = rng.integers(0, m.n_vertices, size=n_roots)
        cache: dict = {}
        for v in roots:
            v = int(v)
            c = cache.get(v)
            if c is None:
                c = vertex_ball_code(m, v, r, degree_marks)
                cache[v] = c
            counts[c] = counts.get(c, 0) + 1
        laws.append(EmpiricalBallLaw(counts, n_roots))
    tvs = [laws[i].tv(laws[i - 1]) for i in range(1, len(laws))]
    return laws, tvs


# -- mass transport ------------------------------------------------------


def mtp_check(m: Map, f) -> tuple[float, float]:
    """Mean mass out of the root vs mean mass into the root, both as
    exact double sums over ordered vertex pairs."""
    n = m.n_vertices
    table = np.empty((n, n))
    for u in range(n):
        for v in range(n):
            table[u, v] = f(m, u, v)
    lhs = math.fsum(math.fsum(row) for row in table.tolist()) / n
    rhs = math.fsum(math.fsum(col) for col in table.T.tolist()) / n
    return lhs, rhs


def transport_invariance_check(m: Map, f, rng, trials: int = 3) -> float:
    """Evaluate f on dart-relabeled copies; honest transports depend
    only on the doubly-rooted isomorphism class, so the deviation
    should be zero."""
    worst = 0.0
    for _ in range(trials):
        q = rng.permutation(m.n_darts)
        qinv = np.empty_like(q)
        qinv[q] = np.arange(m.n_darts)
        sigma = q[m.sigma[qinv]]
        alpha = q[m.alpha[qinv]]
        m2 = Map(sigma, alpha, check=False)
        # vertex v of m corresponds to the tail of q[d] for any dart d at v
        corr = np.zeros(m.n_vertices, dtype=np.int64)
        for v in range(m.n_vertices):
            corr[v] = m2.vertex_of[q[m.vertex_rep[v]]]
        for u in range(m.n_vertices):
            for v in range(m.n_vertices):
                dev = abs(f(m, u, v) - f(m2, int(corr[u]), int(corr[v])))
                worst = max(worst, dev)
    return worst


def degree_biased_root(m: Map, rng) -> tuple[int, int]:
    """Root vertex sampled proportionally to degree, with a uniform
    reference dart at it; realized as one uniform dart."""
    d = int(rng.integers(0, m.n_darts))
    return int(m.vertex_of[d]), d
